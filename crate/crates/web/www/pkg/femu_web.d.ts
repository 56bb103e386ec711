/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of [`inversion`]; moduli are relative to the reference.
 */
export class Inversion {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cost: number;
    readonly forwardSolves: number;
    readonly recovered: Float64Array;
    readonly truth: Float64Array;
}

export function costSweep(x0: number, y0: number, x1: number, y1: number, truth_ratio: number, noise_sigma: number, seed: number, steps: number): Float64Array;

/**
 * `[gx, gy, length_mm, width_mm]`.
 */
export function gridShape(): Float64Array;

export function invert(x0: number, y0: number, x1: number, y1: number, truth_ratio: number, noise_sigma: number, seed: number): Inversion;

export function strainMap(x0: number, y0: number, x1: number, y1: number, ratio: number, which: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_inversion_free: (a: number, b: number) => void;
    readonly costSweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly gridShape: () => [number, number];
    readonly inversion_cost: (a: number) => number;
    readonly inversion_forwardSolves: (a: number) => number;
    readonly inversion_recovered: (a: number) => [number, number];
    readonly inversion_truth: (a: number) => [number, number];
    readonly invert: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly strainMap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
