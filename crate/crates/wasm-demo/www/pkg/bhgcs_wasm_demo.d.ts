/* tslint:disable */
/* eslint-disable */

/**
 * `[Fock dimension, (M + 1) N, ratio]` for `M` modes, `S` bosons and `N`
 * coherent states.
 */
export function compression(modes: number, bosons: number, n: number): Float64Array;

/**
 * Samples a two-mode basis and returns its Bloch angles as
 * `[theta_0, phi_0, theta_1, phi_1, ...]`, centre first.
 */
export function sample_bloch(bosons: number, n: number, beta_div: number, diagonal: boolean, seed: bigint, theta: number, phi: number): Float64Array;

/**
 * Driven two-mode chain, `J(t) = 1 + j1 cos(2 pi t)`. Returns rows of
 * `[t, pop_1 variational, pop_1 exact]`, `samples` rows in total.
 */
export function two_mode_run(bosons: number, n: number, beta_div: number, diagonal: boolean, interaction: number, j1: number, t_final: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compression: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sample_bloch: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: number) => [number, number, number, number];
    readonly two_mode_run: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
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
