/** Typed client for the engine's HTTP API. The viewer talks to the service
 * exclusively through these three endpoints. */

export interface CameraJson {
    fx: number;
    fy: number;
    cx: number;
    cy: number;
    width: number;
    height: number;
    world_to_camera: number[]; // row-major 4x4, 16 floats
}

export type QueryMode = "locate" | "segment" | "multiclass";

export interface RenderResult {
    png: Uint8Array;
    renderMs: number;
    totalMs: number;
}

export interface RelevancyStats {
    min: number;
    max: number;
    mean: number;
}

export interface LocateResult {
    x: number;
    y: number;
    score: number;
    relevancy: RelevancyStats;
    render_ms: number;
    query_ms: number;
    total_ms: number;
}

export interface SegmentResult {
    mask_png_b64: string;
    pixels: number;
    relevancy: RelevancyStats;
    render_ms: number;
    query_ms: number;
    total_ms: number;
}

export interface MulticlassResult {
    classes_png_b64: string;
    class_counts: Record<string, number>;
    render_ms: number;
    query_ms: number;
    total_ms: number;
}

export type QueryResult = LocateResult | SegmentResult | MulticlassResult;

export interface QueryBody {
    camera: CameraJson;
    mode: QueryMode;
    text?: string;
    texts?: string[];
    embedding?: number[];
    embeddings?: number[][];
    threshold?: number;
    canonical_embeddings?: number[][];
}

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly detail: string,
    ) {
        super(`HTTP ${status}: ${detail}`);
    }
}

async function fail(resp: Response): Promise<never> {
    let detail = resp.statusText;
    try {
        const body = await resp.json();
        if (typeof body.detail === "string") detail = body.detail;
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
}

export class EngineClient {
    constructor(
        private readonly baseUrl: string,
        private readonly fetchFn: typeof fetch = fetch,
    ) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
    }

    async listScenes(): Promise<string[]> {
        const resp = await this.fetchFn(`${this.baseUrl}/scenes`);
        if (!resp.ok) await fail(resp);
        return (await resp.json()).scenes;
    }

    async render(scene: string, camera: CameraJson): Promise<RenderResult> {
        const resp = await this.fetchFn(`${this.baseUrl}/scenes/${scene}/render`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ camera }),
        });
        if (!resp.ok) await fail(resp);
        return {
            png: new Uint8Array(await resp.arrayBuffer()),
            renderMs: parseFloat(resp.headers.get("X-Render-Ms") ?? "0"),
            totalMs: parseFloat(resp.headers.get("X-Total-Ms") ?? "0"),
        };
    }

    async query(scene: string, body: QueryBody): Promise<QueryResult> {
        const resp = await this.fetchFn(`${this.baseUrl}/scenes/${scene}/query`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!resp.ok) await fail(resp);
        return await resp.json();
    }
}
