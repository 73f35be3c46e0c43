/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scene_free: (a: number, b: number) => void;
export const scene_contour: (a: number) => [number, number];
export const scene_droplet: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const scene_dropletSvg: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const scene_fieldRgba: (a: number, b: number) => [number, number, number, number];
export const scene_height: (a: number) => number;
export const scene_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const scene_panelCount: (a: number) => number;
export const scene_panelLabel: (a: number, b: number) => [number, number];
export const scene_probe: (a: number, b: number, c: number) => [number, number];
export const scene_probeRgba: (a: number) => [number, number, number, number];
export const scene_trajectories: (a: number) => [number, number];
export const scene_trajectoryCount: (a: number) => number;
export const scene_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
