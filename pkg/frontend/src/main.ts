/** DOM wiring: binds the control panel to the PanelController. */

import { ApiClient } from "./api.js";
import { PanelController } from "./controller.js";
import { DEFAULT_GENERATE, decodeFragment, type PanelState } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

function fillSelect(sel: HTMLSelectElement, options: string[], keep?: string | null): void {
  sel.innerHTML = "";
  for (const name of options) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    sel.appendChild(opt);
  }
  if (keep && options.includes(keep)) sel.value = keep;
}

function boot(): void {
  const api = new ApiClient("..");  // served at /ui/, endpoints at /
  const img = $<HTMLImageElement>("plot");
  const status = $<HTMLDivElement>("status");
  const errorLine = $<HTMLDivElement>("error");
  let imageUrl: string | null = null;
  let applyingState = false;

  const controller = new PanelController(
    api,
    {
      onImage(result) {
        if (imageUrl) URL.revokeObjectURL(imageUrl);
        imageUrl = URL.createObjectURL(result.blob);
        img.src = imageUrl;
        errorLine.textContent = "";
      },
      onStatus(text) {
        status.textContent = text;
      },
      onError(text) {
        errorLine.textContent = text;
      },
      onDatasets(handles, selected) {
        const sel = $<HTMLSelectElement>("dataset");
        fillSelect(
          sel,
          handles.map((h) => h.id),
          selected,
        );
        for (const h of handles) {
          const opt = sel.querySelector(`option[value="${h.id}"]`);
          if (opt) opt.textContent = `${h.id} (${h.kind}, ${h.rows} rows)`;
        }
      },
      onColumns(stats) {
        const names = stats.map((s) => s.name);
        fillSelect($<HTMLSelectElement>("x-metric"), names, controller.state.xMetric);
        fillSelect($<HTMLSelectElement>("y-metric"), names, controller.state.yMetric);
        fillSelect($<HTMLSelectElement>("color-metric"), names, controller.state.colorMetric);
      },
      onStateChanged(state, fragment) {
        syncInputs(state);
        if (!applyingState) history.replaceState(null, "", `#${fragment}`);
      },
    },
    location.hash.length > 1 ? decodeFragment(location.hash) : undefined,
  );

  function syncInputs(s: PanelState): void {
    $<HTMLSelectElement>("kernel").value = s.kernel;
    $<HTMLInputElement>("sigma").value = String(s.sigma);
    $<HTMLInputElement>("sigma-num").value = String(s.sigma);
    $<HTMLInputElement>("cparam").value = String(s.c);
    $<HTMLSelectElement>("field-mode").value = s.fieldMode;
    $<HTMLSelectElement>("plot-mode").value = s.plotMode;
    $<HTMLInputElement>("resolution").value = String(s.resolution);
    $<HTMLSpanElement>("resolution-label").textContent = `${s.resolution}px`;
    $<HTMLInputElement>("marker").value = s.markerRadius === null ? "" : String(s.markerRadius);
    $<HTMLInputElement>("max-points").value = s.maxPoints === null ? "" : String(s.maxPoints);
    $<HTMLInputElement>("seed").value = String(s.seed);
    $<HTMLSelectElement>("palette").value = s.palette;
    $<HTMLInputElement>("range-lo").value = s.rangeLo === null ? "" : String(s.rangeLo);
    $<HTMLInputElement>("range-hi").value = s.rangeHi === null ? "" : String(s.rangeHi);
    $<HTMLInputElement>("show-indices").checked = s.showIndices;
    $<HTMLSelectElement>("color-source").value = s.colorSource;
    const sel = $<HTMLSelectElement>("dataset");
    if (s.datasetId && sel.querySelector(`option[value="${s.datasetId}"]`)) {
      sel.value = s.datasetId;
    }
  }

  // --- data section ---
  $<HTMLButtonElement>("upload-btn").addEventListener("click", () => {
    $<HTMLInputElement>("file-input").click();
  });
  $<HTMLInputElement>("file-input").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const kind = $<HTMLSelectElement>("upload-kind").value;
    void controller.upload(file, kind, file.name);
    input.value = "";
  });
  $<HTMLSelectElement>("dataset").addEventListener("change", (ev) => {
    void controller.selectDataset((ev.target as HTMLSelectElement).value);
  });

  const bindSelect = (id: string, key: keyof PanelState) => {
    $<HTMLSelectElement>(id).addEventListener("change", (ev) => {
      controller.update({ [key]: (ev.target as HTMLSelectElement).value } as Partial<PanelState>);
    });
  };
  bindSelect("x-metric", "xMetric");
  bindSelect("y-metric", "yMetric");
  bindSelect("color-metric", "colorMetric");
  bindSelect("kernel", "kernel");
  bindSelect("field-mode", "fieldMode");
  bindSelect("plot-mode", "plotMode");
  bindSelect("palette", "palette");
  bindSelect("color-source", "colorSource");

  const numFrom = (ev: Event): number => Number((ev.target as HTMLInputElement).value);
  const optionalNum = (ev: Event): number | null => {
    const raw = (ev.target as HTMLInputElement).value.trim();
    return raw === "" ? null : Number(raw);
  };

  $<HTMLInputElement>("sigma").addEventListener("input", (ev) => {
    controller.update({ sigma: numFrom(ev) });
  });
  $<HTMLInputElement>("sigma-num").addEventListener("change", (ev) => {
    controller.update({ sigma: numFrom(ev) });
  });
  $<HTMLInputElement>("cparam").addEventListener("change", (ev) => {
    controller.update({ c: numFrom(ev) });
  });
  $<HTMLInputElement>("resolution").addEventListener("input", (ev) => {
    controller.update({ resolution: numFrom(ev) });
  });
  $<HTMLInputElement>("marker").addEventListener("change", (ev) => {
    controller.update({ markerRadius: optionalNum(ev) });
  });
  $<HTMLInputElement>("max-points").addEventListener("change", (ev) => {
    controller.update({ maxPoints: optionalNum(ev) });
  });
  $<HTMLInputElement>("seed").addEventListener("change", (ev) => {
    controller.update({ seed: numFrom(ev) });
  });
  $<HTMLInputElement>("range-lo").addEventListener("change", (ev) => {
    controller.update({ rangeLo: optionalNum(ev) });
  });
  $<HTMLInputElement>("range-hi").addEventListener("change", (ev) => {
    controller.update({ rangeHi: optionalNum(ev) });
  });
  $<HTMLInputElement>("show-indices").addEventListener("change", (ev) => {
    controller.update({ showIndices: (ev.target as HTMLInputElement).checked });
  });

  // --- generation form (prefilled with the documented defaults) ---
  const g = DEFAULT_GENERATE;
  $<HTMLInputElement>("gen-depth").value = String(g.depthBudget);
  $<HTMLInputElement>("gen-adder").value = String(g.rashomonBoundAdder);
  $<HTMLInputElement>("gen-reg").value = String(g.regularization);
  $<HTMLInputElement>("gen-mult").value = String(g.rashomonBoundMultiplier);
  $<HTMLInputElement>("gen-trivial").checked = g.trivialExtensions;
  $<HTMLInputElement>("gen-nest").value = String(g.nEst);
  $<HTMLButtonElement>("generate-btn").addEventListener("click", () => {
    controller.generateForm = {
      depthBudget: Number($<HTMLInputElement>("gen-depth").value),
      rashomonBoundAdder: Number($<HTMLInputElement>("gen-adder").value),
      regularization: Number($<HTMLInputElement>("gen-reg").value),
      rashomonBoundMultiplier: Number($<HTMLInputElement>("gen-mult").value),
      trivialExtensions: $<HTMLInputElement>("gen-trivial").checked,
      nEst: Number($<HTMLInputElement>("gen-nest").value),
      testFraction: DEFAULT_GENERATE.testFraction,
      splitSeed: DEFAULT_GENERATE.splitSeed,
    };
    void controller.generate();
  });

  window.addEventListener("hashchange", () => {
    applyingState = true;
    try {
      const s = decodeFragment(location.hash);
      controller.update(s);
    } finally {
      applyingState = false;
    }
  });

  // populate kernel dropdown from the catalog, then restore any shared state
  void api
    .kernels()
    .then((kernels) => {
      fillSelect(
        $<HTMLSelectElement>("kernel"),
        kernels.map((k) => k.id),
        controller.state.kernel,
      );
      for (const k of kernels) {
        const opt = $<HTMLSelectElement>("kernel").querySelector(`option[value="${k.id}"]`);
        if (opt) (opt as HTMLOptionElement).title = k.formula;
      }
    })
    .catch(() => errorLine.textContent = "service unreachable: start `var serve`");
  void controller.refreshDatasets().catch(() => undefined);
  if (controller.state.datasetId) {
    void controller.selectDataset(controller.state.datasetId).catch(() => undefined);
  }
  syncInputs(controller.state);
}

document.addEventListener("DOMContentLoaded", boot);
