/* tslint:disable */
/* eslint-disable */

/**
 * Value, marginal products, elasticities and special-case form at one point.
 */
export function evaluate(a: number, sigma: number, delta: number, p: number, q: number, k: number, l: number): string;

/**
 * Local degree of homogeneity on a `grid x grid` log-spaced lattice.
 */
export function homogeneity_map(a: number, sigma: number, delta: number, p: number, q: number, kmin: number, kmax: number, lmin: number, lmax: number, grid: number): string;

/**
 * Synthesizes a panel from the given parameters and fits it back. Returns
 * the fit report document plus the panel's `K, L, V` columns.
 */
export function synthetic_fit(a: number, sigma: number, delta: number, p: number, q: number, n: number, noise: number, starts: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly evaluate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly homogeneity_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number];
    readonly synthetic_fit: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
