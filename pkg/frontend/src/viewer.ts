/** Thin DOM layer: wires the controller to the page. All behavior worth
 * testing lives in state.ts / overlay.ts / camera.ts. */

import { EngineClient } from "./api.js";
import { Intrinsics, OrbitCamera } from "./camera.js";
import { classColor } from "./overlay.js";
import { ViewerController, ViewerState } from "./state.js";

const DEFAULT_INTRINSICS: Intrinsics = {
    fx: 200,
    fy: 200,
    cx: 88,
    cy: 88,
    width: 176,
    height: 176,
};

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
}

function pngUrl(bytes: Uint8Array): string {
    return URL.createObjectURL(new Blob([bytes.buffer as ArrayBuffer], { type: "image/png" }));
}

export function mount(baseUrl: string = ""): ViewerController {
    const client = new EngineClient(baseUrl);
    const camera = new OrbitCamera([0, 0, 5], 5);
    const controller = new ViewerController(client, camera, DEFAULT_INTRINSICS, {
        onChange: renderState,
    });

    const image = el<HTMLImageElement>("render");
    const overlayImg = el<HTMLImageElement>("overlay");
    const crosshair = el<HTMLDivElement>("crosshair");
    const banner = el<HTMLDivElement>("banner");
    const legend = el<HTMLDivElement>("legend");
    const timings = el<HTMLSpanElement>("timings");
    const sceneSelect = el<HTMLSelectElement>("scene");
    const queryInput = el<HTMLInputElement>("query");
    const queryButton = el<HTMLButtonElement>("run");
    const modeSelect = el<HTMLSelectElement>("mode");
    const thresholdInput = el<HTMLInputElement>("threshold");

    function renderState(state: ViewerState): void {
        banner.textContent = state.error ?? "";
        banner.style.display = state.error ? "block" : "none";
        queryButton.disabled = !controller.canQuery();
        sceneSelect.replaceChildren(
            ...state.scenes.map((name) => new Option(name, name, false, name === state.scene)),
        );
        if (state.image) image.src = pngUrl(state.image.png);
        overlayImg.style.display = "none";
        crosshair.style.display = "none";
        legend.replaceChildren();
        if (state.overlay?.kind === "crosshair") {
            crosshair.style.display = "block";
            crosshair.style.left = `${state.overlay.x}px`;
            crosshair.style.top = `${state.overlay.y}px`;
            crosshair.title = `score ${state.overlay.score.toFixed(3)}`;
        } else if (state.overlay) {
            overlayImg.src = pngUrl(state.overlay.png);
            overlayImg.style.display = "block";
            if (state.overlay.kind === "classes") {
                for (const item of state.overlay.legend) {
                    const chip = document.createElement("span");
                    chip.textContent = `class ${item.classIndex} (${item.count})`;
                    chip.style.background = classColor(item.classIndex);
                    legend.append(chip);
                }
            }
        }
        const parts = [];
        if (state.timings.renderMs !== undefined) parts.push(`render ${state.timings.renderMs.toFixed(1)} ms`);
        if (state.timings.queryMs !== undefined) parts.push(`query ${state.timings.queryMs.toFixed(1)} ms`);
        timings.textContent = parts.join(" | ");
    }

    sceneSelect.addEventListener("change", () => {
        controller.state.scene = sceneSelect.value;
        void controller.refresh();
    });
    queryInput.addEventListener("input", () => controller.setQueryText(queryInput.value));
    modeSelect.addEventListener("change", () => controller.setMode(modeSelect.value as never));
    thresholdInput.addEventListener("change", () => {
        void controller.setThreshold(parseFloat(thresholdInput.value));
    });
    queryButton.addEventListener("click", () => void controller.runQuery());

    let dragging = false;
    image.addEventListener("pointerdown", () => (dragging = true));
    window.addEventListener("pointerup", () => (dragging = false));
    window.addEventListener("pointermove", (ev) => {
        if (dragging) controller.moveCamera((cam) => cam.orbit(ev.movementX * 0.01, ev.movementY * 0.01));
    });
    image.addEventListener("wheel", (ev) => {
        ev.preventDefault();
        controller.moveCamera((cam) => cam.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1));
    });

    void controller.loadScenes().then(() => controller.refresh());
    return controller;
}
