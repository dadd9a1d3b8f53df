use tangency_web::{exp_snr_rows, gap_rows, simo_rows, EXP_SNR_COLUMNS, GAP_COLUMNS, SIMO_COLUMNS};

#[test]
fn simo_rows_are_ordered() {
    let rows = simo_rows(12, 1.0, 0.01).unwrap();
    assert_eq!(rows.len(), 12 * SIMO_COLUMNS);
    for (i, r) in rows.chunks(SIMO_COLUMNS).enumerate() {
        assert_eq!(r[0], (i + 1) as f64);
        assert!(r[3] <= r[1] && r[1] < r[2], "{r:?}");
        assert!((r[2] - r[0].ln_1p()).abs() < 1e-14);
    }
}

#[test]
fn exp_snr_rows_bracket_the_quadrature() {
    let rows = exp_snr_rows(5.0, 0.5, 2.0, 0.5, 0.01).unwrap();
    assert_eq!(rows.len(), 4 * EXP_SNR_COLUMNS);
    for r in rows.chunks(EXP_SNR_COLUMNS) {
        assert!(r[1] <= r[2] && r[2] <= r[3], "{r:?}");
    }
}

#[test]
fn gap_rows_end_near_one() {
    let rows = gap_rows(1.5, 2.0, 0.25, 0.01).unwrap();
    assert_eq!(rows.len(), 3 * GAP_COLUMNS);
    let last = &rows[rows.len() - GAP_COLUMNS..];
    assert_eq!(last[0], 2.0);
    assert!((last[1] - 1.0).abs() < 1e-3);
    assert!(rows.chunks(GAP_COLUMNS).all(|r| r[1] <= 1.0));
}

#[test]
fn bad_inputs_come_back_as_messages() {
    assert!(simo_rows(3, -1.0, 0.01).is_err());
    assert!(exp_snr_rows(5.0, 2.0, 1.0, 0.5, 0.01).is_err());
    assert!(gap_rows(0.1, 2.0, 0.1, 0.0).is_err());
}
