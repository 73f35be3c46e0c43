/* tslint:disable */
/* eslint-disable */

export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Half-energy contour of the last probe as `x0, y0, x1, y1, ...`.
     */
    contour(): Float64Array;
    dropletSvg(index: number, lambda1: number, lambda2: number): string;
    droplet(index: number, lambda1: number, lambda2: number): Float64Array;
    /**
     * RGBA rows top to bottom, `w * h * 4` bytes.
     */
    fieldRgba(panel: number): Uint8Array;
    height(): number;
    /**
     * `scene` is `intersection`, `adjacent` or `seven-routes`.
     */
    constructor(scene: string, count: number, seed: number);
    panelCount(): number;
    /**
     * Direction name of a panel (`y-`, `x+`, ...), or `all` for the sum.
     */
    panelLabel(panel: number): string;
    probeRgba(): Uint8Array;
    /**
     * Diffuse from the cell nearest `(x, y)`.
     */
    probe(x: number, y: number): void;
    /**
     * JSON list of `{id, label, points}`.
     */
    trajectories(): string;
    trajectoryCount(): number;
    width(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly scene_contour: (a: number) => [number, number];
    readonly scene_droplet: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly scene_dropletSvg: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly scene_fieldRgba: (a: number, b: number) => [number, number, number, number];
    readonly scene_height: (a: number) => number;
    readonly scene_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly scene_panelCount: (a: number) => number;
    readonly scene_panelLabel: (a: number, b: number) => [number, number];
    readonly scene_probe: (a: number, b: number, c: number) => [number, number];
    readonly scene_probeRgba: (a: number) => [number, number, number, number];
    readonly scene_trajectories: (a: number) => [number, number];
    readonly scene_trajectoryCount: (a: number) => number;
    readonly scene_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
