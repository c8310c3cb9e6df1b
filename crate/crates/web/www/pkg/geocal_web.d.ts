/* tslint:disable */
/* eslint-disable */

export class Verdict {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly automated: boolean;
    readonly calibrated: Float64Array;
    readonly predicted: number;
    readonly reliability: number;
}

export function calibrate(p: Float64Array, a: Float64Array, b: Float64Array, lambda: number, tau: number): Verdict;

export function fromCanvas(x: number, y: number, width: number, height: number): Float64Array;

export function reliabilityField(width: number, height: number, a: Float64Array, b: Float64Array, lambda: number, tau: number): Uint8Array;

export function sampleSize(lambda: number, t: number, delta: number): Float64Array;

export function toCanvas(p: Float64Array, width: number, height: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_verdict_free: (a: number, b: number) => void;
    readonly calibrate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly fromCanvas: (a: number, b: number, c: number, d: number) => [number, number];
    readonly reliabilityField: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly sampleSize: (a: number, b: number, c: number) => [number, number, number, number];
    readonly toCanvas: (a: number, b: number, c: number, d: number) => [number, number];
    readonly verdict_automated: (a: number) => number;
    readonly verdict_calibrated: (a: number) => [number, number];
    readonly verdict_predicted: (a: number) => number;
    readonly verdict_reliability: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
