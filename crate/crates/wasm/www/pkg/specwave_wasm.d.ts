/* tslint:disable */
/* eslint-disable */

/**
 * Holds the last simulated path.
 */
export class Session {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Log-spaced estimate on `[lo, hi]` with a fitted log-log slope.
     */
    estimate(lo: number, hi: number, count: number, ratio: number): Spectrum;
    constructor();
    /**
     * fBm observed after `n` gaps of mean length `delta`.
     */
    simulate(hurst: number, n: number, delta: number, exponential: boolean, seed: number): void;
    times(): Float64Array;
    values(): Float64Array;
}

export class Spectrum {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly ci_hi: Float64Array;
    readonly ci_lo: Float64Array;
    readonly fhat: Float64Array;
    readonly hurst: number;
    readonly lambda: number;
    readonly slope: number;
    readonly tau: number;
    readonly truth: Float64Array;
    readonly xi: Float64Array;
}

/**
 * `[t_0, ψ(t_0), t_1, ψ(t_1), ...]` on `samples` points over the effective
 * support, followed by `[u, ψ̂(u)]` pairs on `(-Λ, Λ)`.
 */
export function wavelet_profile(cap: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_session_free: (a: number, b: number) => void;
    readonly __wbg_spectrum_free: (a: number, b: number) => void;
    readonly session_estimate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly session_new: () => number;
    readonly session_simulate: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly session_times: (a: number) => [number, number];
    readonly session_values: (a: number) => [number, number];
    readonly spectrum_ci_hi: (a: number) => [number, number];
    readonly spectrum_ci_lo: (a: number) => [number, number];
    readonly spectrum_fhat: (a: number) => [number, number];
    readonly spectrum_hurst: (a: number) => number;
    readonly spectrum_lambda: (a: number) => number;
    readonly spectrum_slope: (a: number) => number;
    readonly spectrum_tau: (a: number) => number;
    readonly spectrum_truth: (a: number) => [number, number];
    readonly spectrum_xi: (a: number) => [number, number];
    readonly wavelet_profile: (a: number, b: number) => [number, number, number, number];
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
