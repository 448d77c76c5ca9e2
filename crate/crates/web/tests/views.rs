use prr_web::Mechanism;

#[test]
fn equal_links_views() {
    let m = Mechanism::try_new(&[25.0; 3], &[15.0, 10.0, 5.0], 10.0).unwrap();
    let rect = m.rectangle();
    assert!(rect[0] < rect[1] && rect[2] < rect[3]);

    let view = m.try_pose(20.0, 20.0, 0.0, "---").unwrap();
    assert!(view.summary.starts_with("---"), "{}", view.summary);

    let fractions = m.try_sweep(&[10.0, 30.0], 30, 8).unwrap();
    assert_eq!(fractions.len(), 2);
    assert!(fractions[0] <= fractions[1]);
}
