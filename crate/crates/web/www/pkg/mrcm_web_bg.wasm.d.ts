/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_fieldview_free: (a: number, b: number) => void;
export const basis_count: (a: number, b: number, c: number) => [number, number, number];
export const basis_function: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const curves_em_flux: (a: number) => [number, number];
export const curves_em_pressure: (a: number) => [number, number];
export const curves_rm_flux: (a: number) => [number, number];
export const curves_rm_pressure: (a: number) => [number, number];
export const error_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const fieldview_log_perm: (a: number) => [number, number];
export const fieldview_nx: (a: number) => number;
export const fieldview_ny: (a: number) => number;
export const fieldview_values: (a: number) => [number, number];
export const fine_pressure: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __wbindgen_export_0: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
