/* tslint:disable */
/* eslint-disable */

/**
 * Whether the noisy basis with visibility `eta_p` can be fuzzified into the
 * one with visibility `eta_q` rotated by `angle` radians.
 */
export function compareNoisyBases(eta_p: number, eta_q: number, angle: number): string;

/**
 * Monotones of the noisy qubit basis with visibility `eta`.
 */
export function noisyBasis(eta: number): string;

/**
 * Classification and guessing probability of a seeded random POVM.
 */
export function randomPovm(dim: number, outcomes: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compareNoisyBases: (a: number, b: number, c: number) => [number, number, number, number];
    readonly noisyBasis: (a: number) => [number, number, number, number];
    readonly randomPovm: (a: number, b: number, c: number) => [number, number, number, number];
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
