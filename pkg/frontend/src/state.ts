/**
 * The whole control-panel state, serializable to a shareable URL fragment.
 * decodeFragment(encodeFragment(s)) must reproduce s exactly.
 */

export type FieldMode = "exact" | "shepard" | "additive";
export type PlotMode = "heatmap" | "dot";
export type ColorSource = "field" | "raw";

export interface PanelState {
  datasetId: string | null;
  xMetric: string | null;
  yMetric: string | null;
  colorMetric: string | null;
  kernel: string;
  sigma: number;
  c: number;
  fieldMode: FieldMode;
  plotMode: PlotMode;
  resolution: number;
  markerRadius: number | null; // null = mode default (4 heatmap / 8 dot)
  maxPoints: number | null;    // null = show every point
  seed: number;
  palette: string;
  rangeLo: number | null;      // both null = auto range
  rangeHi: number | null;
  showIndices: boolean;
  colorSource: ColorSource;
}

export const DEFAULT_STATE: PanelState = {
  datasetId: null,
  xMetric: null,
  yMetric: null,
  colorMetric: null,
  kernel: "paper",
  sigma: 0.2,
  c: 1.0,
  fieldMode: "exact",
  plotMode: "heatmap",
  resolution: 256,
  markerRadius: null,
  maxPoints: null,
  seed: 0,
  palette: "red_blue",
  rangeLo: null,
  rangeHi: null,
  showIndices: false,
  colorSource: "field",
};

/** Rashomon generation form; prefilled with the documented defaults. */
export interface GenerateForm {
  depthBudget: number;
  rashomonBoundAdder: number;
  regularization: number;
  rashomonBoundMultiplier: number;
  trivialExtensions: boolean;
  nEst: number;
  testFraction: number;
  splitSeed: number;
}

export const DEFAULT_GENERATE: GenerateForm = {
  depthBudget: 4,
  rashomonBoundAdder: 0.03,
  regularization: 0.02,
  rashomonBoundMultiplier: 0,
  trivialExtensions: true,
  nEst: 40,
  testFraction: 0.3,
  splitSeed: 0,
};

/** null when renderable; otherwise a user-facing reason not to request. */
export function stateProblem(s: PanelState): string | null {
  if (!s.datasetId) return "upload or select a dataset";
  if (!s.xMetric || !s.yMetric || !s.colorMetric) return "pick x, y and color metrics";
  if (s.rangeLo !== null && s.rangeHi !== null && !(s.rangeLo < s.rangeHi)) {
    return "color range needs lo < hi";
  }
  if ((s.rangeLo === null) !== (s.rangeHi === null)) {
    return "set both range bounds or neither";
  }
  return null;
}

/** Wire document for POST /render (field names match the service API). */
export function renderDocument(s: PanelState): Record<string, unknown> {
  return {
    dataset_id: s.datasetId,
    x_metric: s.xMetric,
    y_metric: s.yMetric,
    color_metric: s.colorMetric,
    kernel: s.kernel,
    sigma: s.sigma,
    c: s.c,
    field_mode: s.fieldMode,
    mode: s.plotMode,
    palette: s.palette,
    value_range: s.rangeLo !== null && s.rangeHi !== null ? [s.rangeLo, s.rangeHi] : null,
    marker_radius: s.markerRadius,
    show_indices: s.showIndices,
    width: s.resolution,
    height: s.resolution,
    max_points: s.maxPoints,
    seed: s.seed,
    color_source: s.colorSource,
  };
}

const NUM = (v: string): number => Number(v);

export function encodeFragment(s: PanelState): string {
  const p = new URLSearchParams();
  if (s.datasetId !== null) p.set("dataset", s.datasetId);
  if (s.xMetric !== null) p.set("x", s.xMetric);
  if (s.yMetric !== null) p.set("y", s.yMetric);
  if (s.colorMetric !== null) p.set("color", s.colorMetric);
  p.set("kernel", s.kernel);
  p.set("sigma", String(s.sigma));
  p.set("c", String(s.c));
  p.set("field", s.fieldMode);
  p.set("mode", s.plotMode);
  p.set("res", String(s.resolution));
  if (s.markerRadius !== null) p.set("marker", String(s.markerRadius));
  if (s.maxPoints !== null) p.set("maxpts", String(s.maxPoints));
  p.set("seed", String(s.seed));
  p.set("palette", s.palette);
  if (s.rangeLo !== null && s.rangeHi !== null) {
    p.set("range", `${s.rangeLo}:${s.rangeHi}`);
  }
  if (s.showIndices) p.set("indices", "1");
  p.set("src", s.colorSource);
  return p.toString();
}

export function decodeFragment(fragment: string): PanelState {
  const p = new URLSearchParams(fragment.replace(/^#/, ""));
  const s: PanelState = { ...DEFAULT_STATE };
  if (p.has("dataset")) s.datasetId = p.get("dataset");
  if (p.has("x")) s.xMetric = p.get("x");
  if (p.has("y")) s.yMetric = p.get("y");
  if (p.has("color")) s.colorMetric = p.get("color");
  if (p.has("kernel")) s.kernel = p.get("kernel")!;
  if (p.has("sigma")) s.sigma = NUM(p.get("sigma")!);
  if (p.has("c")) s.c = NUM(p.get("c")!);
  if (p.has("field")) s.fieldMode = p.get("field") as FieldMode;
  if (p.has("mode")) s.plotMode = p.get("mode") as PlotMode;
  if (p.has("res")) s.resolution = NUM(p.get("res")!);
  if (p.has("marker")) s.markerRadius = NUM(p.get("marker")!);
  if (p.has("maxpts")) s.maxPoints = NUM(p.get("maxpts")!);
  if (p.has("seed")) s.seed = NUM(p.get("seed")!);
  if (p.has("palette")) s.palette = p.get("palette")!;
  if (p.has("range")) {
    const [lo, hi] = p.get("range")!.split(":");
    s.rangeLo = NUM(lo!);
    s.rangeHi = NUM(hi!);
  }
  s.showIndices = p.get("indices") === "1";
  if (p.has("src")) s.colorSource = p.get("src") as ColorSource;
  return s;
}
