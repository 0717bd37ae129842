use humour_styles_core::annotation::fleiss_kappa_from_counts;

// Ten subjects, fourteen raters, five categories.
const TEN: [[usize; 5]; 10] = [
    [0, 0, 0, 0, 14],
    [0, 2, 6, 4, 2],
    [0, 0, 3, 5, 6],
    [0, 3, 9, 2, 0],
    [2, 2, 8, 1, 1],
    [7, 7, 0, 0, 0],
    [3, 2, 6, 3, 0],
    [2, 5, 3, 2, 2],
    [6, 5, 2, 1, 0],
    [0, 2, 2, 3, 7],
];

const EXTRA: [[usize; 5]; 4] = [[14, 0, 0, 0, 0], [1, 1, 1, 1, 10], [4, 4, 2, 2, 2], [0, 0, 7, 7, 0]];

fn table(rows: &[[usize; 5]]) -> Vec<Vec<usize>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

#[test]
fn ten_subject_table() {
    // P-bar = 172/455, P-e = 417/1960, kappa = 4211/20059 (exact fractions).
    let k = fleiss_kappa_from_counts(&table(&TEN)).unwrap();
    assert!((k - 4211.0 / 20059.0).abs() < 1e-9, "{k}");
    assert!((k - 0.210).abs() < 5e-4);
}

#[test]
fn fourteen_subject_table() {
    // P-bar = 537/1274, P-e = 1977/9604, kappa = 26925/99151.
    let mut rows = TEN.to_vec();
    rows.extend(EXTRA);
    let k = fleiss_kappa_from_counts(&table(&rows)).unwrap();
    assert!((k - 26925.0 / 99151.0).abs() < 1e-9, "{k}");
}

#[test]
fn unanimous_is_exactly_one() {
    let rows = vec![vec![3, 0, 0, 0, 0], vec![0, 0, 3, 0, 0], vec![0, 0, 0, 0, 3]];
    assert_eq!(fleiss_kappa_from_counts(&rows).unwrap(), 1.0);
    let single_category = vec![vec![0, 4, 0], vec![0, 4, 0]];
    assert_eq!(fleiss_kappa_from_counts(&single_category).unwrap(), 1.0);
}

#[test]
fn row_order_does_not_matter() {
    let mut rows = TEN.to_vec();
    rows.extend(EXTRA);
    let forward = fleiss_kappa_from_counts(&table(&rows)).unwrap();
    rows.reverse();
    assert_eq!(forward, fleiss_kappa_from_counts(&table(&rows)).unwrap());
}
