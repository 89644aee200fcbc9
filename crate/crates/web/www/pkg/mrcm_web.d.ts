/* tslint:disable */
/* eslint-disable */
export function fine_pressure(problem: string, seed: number, variance: number): FieldView;
export function error_curves(problem: string, seed: number, variance: number, alpha: number, oversampling: number, smoothing: number, iterations: number): Curves;
export function basis_function(problem: string, seed: number, variance: number, alpha: number, oversampling: number, subdomain: number, index: number): FieldView;
export function basis_count(problem: string, subdomain: number): number;
/**
 * Per-iteration relative errors of both methods.
 */
export class Curves {
  private constructor();
  free(): void;
  em_pressure(): Float64Array;
  rm_pressure(): Float64Array;
  em_flux(): Float64Array;
  rm_flux(): Float64Array;
}
/**
 * Cell values on an `nx × ny` grid, row by row from the bottom.
 */
export class FieldView {
  private constructor();
  free(): void;
  nx(): number;
  ny(): number;
  values(): Float64Array;
  /**
   * log10 of the permeability, same layout.
   */
  log_perm(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
  readonly memory: WebAssembly.Memory;
  readonly __wbg_curves_free: (a: number, b: number) => void;
  readonly __wbg_fieldview_free: (a: number, b: number) => void;
  readonly basis_count: (a: number, b: number, c: number) => [number, number, number];
  readonly basis_function: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
  readonly curves_em_flux: (a: number) => [number, number];
  readonly curves_em_pressure: (a: number) => [number, number];
  readonly curves_rm_flux: (a: number) => [number, number];
  readonly curves_rm_pressure: (a: number) => [number, number];
  readonly error_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
  readonly fieldview_log_perm: (a: number) => [number, number];
  readonly fieldview_nx: (a: number) => number;
  readonly fieldview_ny: (a: number) => number;
  readonly fieldview_values: (a: number) => [number, number];
  readonly fine_pressure: (a: number, b: number, c: number, d: number) => [number, number, number];
  readonly __wbindgen_export_0: WebAssembly.Table;
  readonly __wbindgen_malloc: (a: number, b: number) => number;
  readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
