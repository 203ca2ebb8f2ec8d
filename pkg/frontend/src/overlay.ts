/** Query-result overlays: decoded dimensions, crosshair placement, class
 * legend. Overlays must always match the render dimensions exactly -- a
 * mismatch means the camera changed between render and query, and drawing
 * it would silently mislead the operator. */

import type { LocateResult, MulticlassResult, QueryMode, QueryResult, SegmentResult } from "./api.js";

export interface Dimensions {
    width: number;
    height: number;
}

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

/** Width/height straight from the IHDR chunk; no full decode needed. */
export function pngDimensions(bytes: Uint8Array): Dimensions {
    if (bytes.length < 24 || PNG_SIGNATURE.some((b, i) => bytes[i] !== b)) {
        throw new Error("not a PNG");
    }
    const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
    return { width: view.getUint32(16), height: view.getUint32(20) };
}

export function b64ToBytes(b64: string): Uint8Array {
    if (typeof atob === "function") {
        const bin = atob(b64);
        const out = new Uint8Array(bin.length);
        for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
        return out;
    }
    // node (tests): no atob on older runtimes, use Buffer via globalThis
    const buf = (globalThis as { Buffer?: { from(s: string, enc: string): Uint8Array } }).Buffer;
    if (!buf) throw new Error("no base64 decoder available");
    return new Uint8Array(buf.from(b64, "base64"));
}

export interface CrosshairOverlay {
    kind: "crosshair";
    x: number;
    y: number;
    score: number;
}

export interface MaskOverlay {
    kind: "mask";
    png: Uint8Array;
    width: number;
    height: number;
    pixels: number;
}

export interface ClassesOverlay {
    kind: "classes";
    png: Uint8Array;
    width: number;
    height: number;
    legend: { classIndex: number; count: number; color: string }[];
}

export type Overlay = CrosshairOverlay | MaskOverlay | ClassesOverlay;

/** Deterministic class palette; class 0 (background) is transparent-ish gray. */
export function classColor(classIndex: number): string {
    if (classIndex === 0) return "#80808040";
    const hue = (classIndex * 137.508) % 360; // golden-angle spacing
    return `hsl(${hue.toFixed(1)}, 85%, 55%)`;
}

export function overlayFromQuery(mode: QueryMode, result: QueryResult, render: Dimensions): Overlay {
    if (mode === "locate") {
        const r = result as LocateResult;
        if (r.x < 0 || r.x >= render.width || r.y < 0 || r.y >= render.height) {
            throw new Error(`crosshair (${r.x}, ${r.y}) outside the render`);
        }
        return { kind: "crosshair", x: r.x, y: r.y, score: r.score };
    }
    const b64 = mode === "segment"
        ? (result as SegmentResult).mask_png_b64
        : (result as MulticlassResult).classes_png_b64;
    const png = b64ToBytes(b64);
    const dims = pngDimensions(png);
    if (dims.width !== render.width || dims.height !== render.height) {
        throw new Error(
            `overlay is ${dims.width}x${dims.height}, render is ${render.width}x${render.height}`,
        );
    }
    if (mode === "segment") {
        return { kind: "mask", png, ...dims, pixels: (result as SegmentResult).pixels };
    }
    const counts = (result as MulticlassResult).class_counts;
    const legend = Object.entries(counts)
        .map(([k, count]) => ({ classIndex: parseInt(k, 10), count, color: classColor(parseInt(k, 10)) }))
        .sort((a, b) => a.classIndex - b.classIndex);
    return { kind: "classes", png, ...dims, legend };
}
