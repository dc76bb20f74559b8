use plastokit::data::UniaxialDataset;
use plastokit::path::LoadingPath;
use proptest::prelude::*;

proptest! {
    #[test]
    fn csv_round_trip_is_exact(rows in prop::collection::vec((-1.0f64..1.0, -1e3f64..1e3), 1..60)) {
        let (eps, sig): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        let d = UniaxialDataset::new(eps, sig).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with("step,eps11,sig11\n"));
        prop_assert!(!text.contains('\r'));
        prop_assert_eq!(UniaxialDataset::read_csv(&buf[..]).unwrap(), d);
    }

    #[test]
    fn branches_partition_path(amps in prop::collection::vec(1e-4f64..0.02, 1..5), per in 500.0f64..5000.0) {
        let p = LoadingPath::ascending(&amps, per);
        let t = p.targets();
        let b = p.branches();
        prop_assert_eq!(t.len(), p.n_increments());
        prop_assert_eq!(*b.last().unwrap(), 2 * amps.len());
        for w in b.windows(2) {
            prop_assert!(w[1] == w[0] || w[1] == w[0] + 1);
        }
        prop_assert!(t.last().unwrap().abs() < 1e-15);
    }
}

#[test]
fn extra_columns_and_whitespace() {
    let d = UniaxialDataset::read_csv("sig11, eps11 ,note\n0 ,0,a\n1,0.5 ,b\n".as_bytes()).unwrap();
    assert_eq!(d.eps, vec![0.0, 0.5]);
    assert_eq!(d.sig, vec![0.0, 1.0]);
}
