use mrcm_web::*;

#[test]
fn views_have_grid_shape() {
    let f = fine_pressure_impl("dipole", 1, 1.0).unwrap();
    assert_eq!((f.nx(), f.ny(), f.values().len()), (64, 64, 64 * 64));
    let b = basis_function_impl("lognormal", 3, 2.0, 10.0, 2, 12, 0).unwrap();
    let v = b.values();
    assert_eq!(v.len(), 110 * 30);
    assert!(v.iter().any(|x| x.is_nan()) && v.iter().any(|x| x.is_finite()));
    assert_eq!(basis_count_impl("dipole", 5).unwrap(), 4);
    assert_eq!(basis_count_impl("dipole", 0).unwrap(), 2);
    assert!(build("nope", 1, 1.0).is_err());
    assert!(basis_function_impl("dipole", 1, 1.0, 10.0, 2, 0, 2).is_err());
}

#[test]
fn curves_start_equal_and_decrease() {
    let c = error_curves_impl("dipole", 1, 1.0, 10.0, 2, 4, 3).unwrap();
    assert_eq!(c.rm_pressure()[0], c.em_pressure()[0]);
    assert_eq!(c.em_flux().len(), 4);
    assert!(c.em_pressure().last().unwrap() < &c.em_pressure()[0]);
}
