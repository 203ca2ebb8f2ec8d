/** Viewer state machine, kept free of DOM so it is testable headless.
 *
 * Camera-driven renders are debounced (default 150 ms) and only one render
 * request is in flight at a time; responses arriving out of order are
 * discarded by sequence number. Errors land in a banner and never clear the
 * last good image. */

import { EngineClient, QueryMode, QueryResult, RenderResult } from "./api.js";
import { Intrinsics, OrbitCamera } from "./camera.js";
import { Overlay, overlayFromQuery, pngDimensions } from "./overlay.js";

export interface Timings {
    renderMs?: number;
    queryMs?: number;
    totalMs?: number;
}

export interface ViewerState {
    scenes: string[];
    scene: string | null;
    queryText: string;
    mode: QueryMode;
    threshold: number;
    image: RenderResult | null;
    overlay: Overlay | null;
    error: string | null;
    timings: Timings;
    busy: boolean;
}

type Scheduler = (fn: () => void, ms: number) => unknown;

export interface ControllerOptions {
    debounceMs?: number;
    schedule?: Scheduler;
    cancel?: (handle: unknown) => void;
    onChange?: (state: ViewerState) => void;
}

export class ViewerController {
    readonly state: ViewerState = {
        scenes: [],
        scene: null,
        queryText: "",
        mode: "locate",
        threshold: 0.5,
        image: null,
        overlay: null,
        error: null,
        timings: {},
        busy: false,
    };

    private readonly debounceMs: number;
    private readonly schedule: Scheduler;
    private readonly cancelTimer: (handle: unknown) => void;
    private readonly onChange: (state: ViewerState) => void;
    private pendingTimer: unknown = null;
    private renderSeq = 0;
    private querySeq = 0;

    constructor(
        private readonly client: EngineClient,
        public readonly camera: OrbitCamera,
        private readonly intrinsics: Intrinsics,
        opts: ControllerOptions = {},
    ) {
        this.debounceMs = opts.debounceMs ?? 150;
        this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
        this.cancelTimer = opts.cancel ?? ((h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]));
        this.onChange = opts.onChange ?? (() => undefined);
    }

    private emit(): void {
        this.onChange(this.state);
    }

    async loadScenes(): Promise<void> {
        try {
            this.state.scenes = await this.client.listScenes();
            if (this.state.scene === null && this.state.scenes.length > 0) {
                this.state.scene = this.state.scenes[0];
            }
            this.state.error = null;
        } catch (err) {
            this.state.error = String(err);
        }
        this.emit();
    }

    canQuery(): boolean {
        return this.state.scene !== null && this.state.queryText.trim().length > 0;
    }

    setQueryText(text: string): void {
        this.state.queryText = text;
        this.emit();
    }

    setMode(mode: QueryMode): void {
        this.state.mode = mode;
        this.emit();
    }

    /** Threshold slider: re-runs the query when a segment result is showing. */
    async setThreshold(threshold: number): Promise<void> {
        if (threshold <= 0 || threshold >= 1) throw new Error("threshold must lie in (0,1)");
        this.state.threshold = threshold;
        this.emit();
        if (this.state.mode === "segment" && this.state.overlay?.kind === "mask") {
            await this.runQuery();
        }
    }

    /** Camera interaction entry point: mutate, then debounce one render. */
    moveCamera(mutate: (cam: OrbitCamera) => void): void {
        mutate(this.camera);
        this.camera.clamp();
        if (this.pendingTimer !== null) this.cancelTimer(this.pendingTimer);
        this.pendingTimer = this.schedule(() => {
            this.pendingTimer = null;
            void this.refresh();
        }, this.debounceMs);
    }

    /** Fetch a render for the current camera; stale responses are dropped. */
    async refresh(): Promise<void> {
        if (this.state.scene === null) return;
        const seq = ++this.renderSeq;
        this.state.busy = true;
        this.emit();
        try {
            const image = await this.client.render(
                this.state.scene,
                this.camera.toCameraJson(this.intrinsics),
            );
            if (seq !== this.renderSeq) return; // a newer request superseded us
            this.state.image = image;
            this.state.overlay = null; // stale against the new viewpoint
            this.state.timings = { renderMs: image.renderMs, totalMs: image.totalMs };
            this.state.error = null;
        } catch (err) {
            if (seq !== this.renderSeq) return;
            this.state.error = String(err); // keep the previous image visible
        } finally {
            if (seq === this.renderSeq) {
                this.state.busy = false;
                this.emit();
            }
        }
    }

    async runQuery(): Promise<QueryResult | null> {
        if (!this.canQuery() || this.state.image === null) return null;
        const seq = ++this.querySeq;
        const mode = this.state.mode;
        const camera = this.camera.toCameraJson(this.intrinsics);
        try {
            const result = await this.client.query(this.state.scene as string, {
                camera,
                mode,
                threshold: this.state.threshold,
                ...(mode === "multiclass"
                    ? { texts: this.state.queryText.split(",").map((t) => t.trim()) }
                    : { text: this.state.queryText }),
            });
            if (seq !== this.querySeq) return null;
            const dims = pngDimensions(this.state.image.png);
            this.state.overlay = overlayFromQuery(mode, result, dims);
            this.state.timings = {
                ...this.state.timings,
                queryMs: result.query_ms,
                totalMs: result.total_ms,
            };
            this.state.error = null;
            this.emit();
            return result;
        } catch (err) {
            if (seq !== this.querySeq) return null;
            const msg = String(err);
            this.state.error = msg.includes("502") ? "embedder offline" : msg;
            this.emit();
            return null;
        }
    }
}
