/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const frank_density: (a: number, b: number) => [number, number, number, number];
export const frank_samples: (a: number, b: number, c: bigint) => [number, number, number, number];
export const kendall_tau: (a: number) => [number, number, number];
export const power_curves: (a: number) => [number, number];
export const power_ut: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const tree_probabilities: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
