/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_verdict_free: (a: number, b: number) => void;
export const calibrate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const fromCanvas: (a: number, b: number, c: number, d: number) => [number, number];
export const reliabilityField: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const sampleSize: (a: number, b: number, c: number) => [number, number, number, number];
export const toCanvas: (a: number, b: number, c: number, d: number) => [number, number];
export const verdict_automated: (a: number) => number;
export const verdict_calibrated: (a: number) => [number, number];
export const verdict_predicted: (a: number) => number;
export const verdict_reliability: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
