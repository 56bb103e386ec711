/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_inversion_free: (a: number, b: number) => void;
export const costSweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const gridShape: () => [number, number];
export const inversion_cost: (a: number) => number;
export const inversion_forwardSolves: (a: number) => number;
export const inversion_recovered: (a: number) => [number, number];
export const inversion_truth: (a: number) => [number, number];
export const invert: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const strainMap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
