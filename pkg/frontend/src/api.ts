/** Typed client for the workbench service; the UI's only data source. */

export interface DatasetHandle {
  id: string;
  kind: "model_table" | "raw_dataset";
  schema: string[];
  rows: number;
  created_at: string;
}

export interface ColumnStat {
  name: string;
  min: number | null;
  max: number | null;
  missing: number;
}

export interface KernelEntry {
  id: string;
  group: number;
  class: string;
  formula: string;
}

export interface RenderResult {
  blob: Blob;
  gridMin: string;
  gridMax: string;
  droppedRows: string;
  warnings: string;
}

export interface GenerateResult {
  handle: DatasetHandle;
  models: number;
  optimum: number;
  bound: number;
  config: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** What the controller needs; ApiClient is the real implementation. */
export interface WorkbenchApi {
  uploadDataset(file: File | Blob, kind: string, name?: string): Promise<DatasetHandle>;
  listDatasets(): Promise<DatasetHandle[]>;
  columns(datasetId: string): Promise<ColumnStat[]>;
  kernels(): Promise<KernelEntry[]>;
  render(doc: Record<string, unknown>): Promise<RenderResult>;
  generate(doc: Record<string, unknown>): Promise<GenerateResult>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raise(resp: Response): Promise<never> {
  let code = "error";
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = (await resp.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(resp.status, code, message);
}

export class ApiClient implements WorkbenchApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async uploadDataset(file: File | Blob, kind: string, name = "upload.csv"): Promise<DatasetHandle> {
    const form = new FormData();
    form.append("file", file, name);
    form.append("kind", kind);
    const resp = await this.fetchFn(`${this.base}/datasets`, { method: "POST", body: form });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as DatasetHandle;
  }

  async listDatasets(): Promise<DatasetHandle[]> {
    const resp = await this.fetchFn(`${this.base}/datasets`);
    if (!resp.ok) await raise(resp);
    return ((await resp.json()) as { datasets: DatasetHandle[] }).datasets;
  }

  async columns(datasetId: string): Promise<ColumnStat[]> {
    const resp = await this.fetchFn(`${this.base}/datasets/${datasetId}/columns`);
    if (!resp.ok) await raise(resp);
    return ((await resp.json()) as { columns: ColumnStat[] }).columns;
  }

  async kernels(): Promise<KernelEntry[]> {
    const resp = await this.fetchFn(`${this.base}/kernels`);
    if (!resp.ok) await raise(resp);
    return ((await resp.json()) as { kernels: KernelEntry[] }).kernels;
  }

  async render(doc: Record<string, unknown>): Promise<RenderResult> {
    const resp = await this.fetchFn(`${this.base}/render`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!resp.ok) await raise(resp);
    return {
      blob: await resp.blob(),
      gridMin: resp.headers.get("X-Grid-Min") ?? "",
      gridMax: resp.headers.get("X-Grid-Max") ?? "",
      droppedRows: resp.headers.get("X-Dropped-Rows") ?? "0",
      warnings: resp.headers.get("X-Warnings") ?? "",
    };
  }

  async generate(doc: Record<string, unknown>): Promise<GenerateResult> {
    const resp = await this.fetchFn(`${this.base}/rashomon/generate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as GenerateResult;
  }
}
