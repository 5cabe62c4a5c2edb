/* tslint:disable */
/* eslint-disable */

/**
 * Copula density at cell centres of a `grid`×`grid` lattice, row j holds v.
 */
export function frank_density(theta: number, grid: number): Float64Array;

/**
 * `n` copula draws interleaved as `[u0, v0, u1, v1, ..]`.
 */
export function frank_samples(theta: number, n: number, seed: bigint): Float64Array;

export function kendall_tau(theta: number): number;

/**
 * `points` samples of both power curves: `[v.., wind_kw.., s.., pv_kw..]`,
 * wind speed over [0, 30] m/s and irradiance over [0, 1.2] kW/m².
 */
export function power_curves(points: number): Float64Array;

/**
 * Power moments from Gaussian inputs: `[ut_wind_mean, ut_wind_sd,
 * ut_pv_mean, ut_pv_sd, mc_wind_mean, mc_wind_sd, mc_pv_mean, mc_pv_sd]`.
 */
export function power_ut(wind_mean: number, wind_std: number, ghi_mean: number, ghi_std: number, draws: number, seed: bigint): Float64Array;

/**
 * The 16 cell probabilities in scenario-id order under the reference
 * wind and precipitation marginals.
 */
export function tree_probabilities(theta: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly frank_density: (a: number, b: number) => [number, number, number, number];
    readonly frank_samples: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly kendall_tau: (a: number) => [number, number, number];
    readonly power_curves: (a: number) => [number, number];
    readonly power_ut: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly tree_probabilities: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
