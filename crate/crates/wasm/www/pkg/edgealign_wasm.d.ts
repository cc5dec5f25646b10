/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Clears the overlay.
     */
    clear(): void;
    /**
     * Coarse-to-fine search over every translation and 0..=90 degrees.
     * Returns a JSON document with the pose, score and ground truth.
     */
    detect(neighborhood: number, step: number, step_theta_deg: number, levels: number): string;
    /**
     * Score over translations at one rotation, sampled every `step` pixels,
     * as RGBA (`heatmap_width` x `heatmap_height`). Negative scores are
     * black, 1 is white.
     */
    heatmap(neighborhood: number, theta_deg: number, step: number): Uint8Array;
    heatmap_height(step: number): number;
    heatmap_width(step: number): number;
    height(): number;
    /**
     * Renders a scene. `shape` is one of `rectangle`, `ring`, `l_bracket`,
     * `cross`.
     */
    constructor(width: number, height: number, shape: string, size: number, x: number, y: number, theta_deg: number, clutter: number, seed: number, noise_sigma: number);
    /**
     * RGBA bytes of the scene, with the last detection's model points in
     * red.
     */
    scene_rgba(): Uint8Array;
    width(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_clear: (a: number) => void;
    readonly demo_detect: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_heatmap: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_heatmap_height: (a: number, b: number) => number;
    readonly demo_heatmap_width: (a: number, b: number) => number;
    readonly demo_height: (a: number) => number;
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number];
    readonly demo_scene_rgba: (a: number) => [number, number];
    readonly demo_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
