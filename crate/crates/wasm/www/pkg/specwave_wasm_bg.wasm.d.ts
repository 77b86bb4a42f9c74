/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_session_free: (a: number, b: number) => void;
export const __wbg_spectrum_free: (a: number, b: number) => void;
export const session_estimate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const session_new: () => number;
export const session_simulate: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
export const session_times: (a: number) => [number, number];
export const session_values: (a: number) => [number, number];
export const spectrum_ci_hi: (a: number) => [number, number];
export const spectrum_ci_lo: (a: number) => [number, number];
export const spectrum_fhat: (a: number) => [number, number];
export const spectrum_hurst: (a: number) => number;
export const spectrum_lambda: (a: number) => number;
export const spectrum_slope: (a: number) => number;
export const spectrum_tau: (a: number) => number;
export const spectrum_truth: (a: number) => [number, number];
export const spectrum_xi: (a: number) => [number, number];
export const wavelet_profile: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
