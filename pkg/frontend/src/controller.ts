/**
 * DOM-independent panel logic: holds the PanelState, debounces settled
 * changes into at most one in-flight render, and keeps the displayed image
 * bound to the latest state. The DOM layer only forwards input events here
 * and paints what the callbacks deliver.
 */

import type { ColumnStat, DatasetHandle, RenderResult, WorkbenchApi } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import { RequestGate } from "./gate.js";
import {
  DEFAULT_GENERATE,
  DEFAULT_STATE,
  encodeFragment,
  renderDocument,
  stateProblem,
  type GenerateForm,
  type PanelState,
} from "./state.js";

export interface ControllerCallbacks {
  onImage(result: RenderResult): void;
  onStatus(text: string): void;
  onError(text: string): void;
  onDatasets(handles: DatasetHandle[], selected: string | null): void;
  onColumns(stats: ColumnStat[]): void;
  onStateChanged(state: PanelState, fragment: string): void;
}

export const RENDER_DEBOUNCE_MS = 150;

export class PanelController {
  state: PanelState;
  generateForm: GenerateForm = { ...DEFAULT_GENERATE };
  readonly gate = new RequestGate();
  private readonly scheduleRender: Debounced<[]>;

  constructor(
    private readonly api: WorkbenchApi,
    private readonly cb: ControllerCallbacks,
    initial?: PanelState,
    debounceMs: number = RENDER_DEBOUNCE_MS,
  ) {
    this.state = initial ? { ...initial } : { ...DEFAULT_STATE };
    this.scheduleRender = debounce(() => this.renderNow(), debounceMs);
  }

  /** Apply a user edit; a settled valid state yields exactly one request. */
  update(patch: Partial<PanelState>): void {
    this.state = { ...this.state, ...patch };
    this.cb.onStateChanged(this.state, encodeFragment(this.state));
    const problem = stateProblem(this.state);
    if (problem) {
      this.scheduleRender.cancel();
      this.cb.onError(problem); // inline; the previous plot stays up
      return;
    }
    this.scheduleRender();
  }

  renderNow(): void {
    const problem = stateProblem(this.state);
    if (problem) {
      this.cb.onError(problem);
      return;
    }
    const doc = renderDocument(this.state);
    this.gate.submit(
      () => this.api.render(doc),
      (result) => {
        this.cb.onImage(result);
        const warn = result.warnings ? ` | ${result.warnings}` : "";
        this.cb.onStatus(
          `grid [${short(result.gridMin)}, ${short(result.gridMax)}]` +
            ` | dropped ${result.droppedRows}${warn}`,
        );
      },
      (err) => this.cb.onError(describe(err)),
    );
  }

  async refreshDatasets(): Promise<void> {
    const handles = await this.api.listDatasets();
    this.cb.onDatasets(handles, this.state.datasetId);
  }

  /** Upload: store, select, fill the axis selectors, render. */
  async upload(file: File | Blob, kind: string, name?: string): Promise<void> {
    try {
      const handle = await this.api.uploadDataset(file, kind, name);
      await this.selectDataset(handle.id);
      await this.refreshDatasets();
    } catch (err) {
      this.cb.onError(describe(err)); // panel state stays as it was
    }
  }

  /** Select a dataset and default the axis metrics from its columns. */
  async selectDataset(datasetId: string): Promise<void> {
    const stats = await this.api.columns(datasetId);
    this.cb.onColumns(stats);
    const names = stats.map((s) => s.name);
    const pick = (wanted: string | null, fallback: number) =>
      wanted && names.includes(wanted) ? wanted : (names[Math.min(fallback, names.length - 1)] ?? null);
    this.update({
      datasetId,
      xMetric: pick(this.state.xMetric, 0),
      yMetric: pick(this.state.yMetric, 1),
      colorMetric: pick(this.state.colorMetric, 2),
    });
  }

  /** Run the Rashomon pipeline; auto-select the resulting model table. */
  async generate(): Promise<void> {
    if (!this.state.datasetId) {
      this.cb.onError("select a raw dataset first");
      return;
    }
    const f = this.generateForm;
    try {
      const result = await this.api.generate({
        dataset_id: this.state.datasetId,
        depth_budget: f.depthBudget,
        rashomon_bound_adder: f.rashomonBoundAdder,
        regularization: f.regularization,
        rashomon_bound_multiplier: f.rashomonBoundMultiplier,
        trivial_extensions: f.trivialExtensions,
        n_est: f.nEst,
        test_fraction: f.testFraction,
        split_seed: f.splitSeed,
      });
      this.cb.onStatus(
        `generated ${result.models} models (optimum ${result.optimum.toFixed(4)}, ` +
          `bound ${result.bound.toFixed(4)})`,
      );
      await this.selectDataset(result.handle.id);
      await this.refreshDatasets();
    } catch (err) {
      this.cb.onError(describe(err));
    }
  }
}

function short(v: string): string {
  const n = Number(v);
  return Number.isFinite(n) ? n.toPrecision(4) : v;
}

function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
