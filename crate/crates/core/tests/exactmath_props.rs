use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use tropcount::exactmath::{
    format_rational, integer_kernel, lattice_index, parse_rational, quotient_map, saturate_columns, smith_normal_form, solve_rational, to_rational,
    IntMatrix, Rational,
};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-9i64..=9, rows * cols).prop_map(move |v| {
        let rows_v: Vec<Vec<i64>> = v.chunks(cols).map(|c| c.to_vec()).collect();
        IntMatrix::from_i64_rows(&rows_v, cols)
    })
}

fn any_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(r, c)| matrix(r, c))
}

/// Products of thin factors: usually rank deficient, so kernels are nontrivial.
fn low_rank_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=4, 1usize..=3, 2usize..=5).prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)).prop_map(|(a, b)| a.mul(&b)))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// gcd of all k x k minors (the k-th determinantal divisor).
fn minor_gcd(a: &IntMatrix, k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rs in subsets(a.rows(), k) {
        for cs in subsets(a.cols(), k) {
            g = g.gcd(&a.select_rows(&rs).select_columns(&cs).det());
        }
    }
    g
}

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn smith_form_invariants(a in any_matrix()) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.left.mul(&a).mul(&s.right), s.diag.clone());
        prop_assert!(s.left.det().abs().is_one());
        prop_assert!(s.right.det().abs().is_one());
        for i in 0..s.diag.rows() {
            for j in 0..s.diag.cols() {
                if i != j {
                    prop_assert!(s.diag[(i, j)].is_zero());
                }
            }
        }
        let d = s.diagonal();
        prop_assert!(d.iter().all(|x| !x.is_negative()));
        for w in d.windows(2) {
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
        // d_1 ... d_k equals the k-th determinantal divisor
        let mut prod = BigInt::one();
        for (k, x) in d.iter().enumerate() {
            prod *= x;
            prop_assert_eq!(prod.clone(), minor_gcd(&a, k + 1));
        }
        prop_assert_eq!(s.rank(), a.rank());
    }

    #[test]
    fn lattice_index_is_abs_det(a in (1usize..=4).prop_flat_map(|n| matrix(n, n))) {
        let det = a.det();
        match lattice_index(&a) {
            Ok(i) => prop_assert_eq!(i, det.abs()),
            Err(_) => prop_assert!(det.is_zero()),
        }
    }

    #[test]
    fn kernel_is_saturated(a in prop_oneof![any_matrix(), low_rank_matrix()], probe in prop::collection::vec(-5i64..=5, 5)) {
        let k = integer_kernel(&a);
        let n = a.cols();
        prop_assert_eq!(k.rows(), n);
        prop_assert_eq!(k.cols(), n - a.rank());
        prop_assert!(a.mul(&k).is_zero());
        if k.cols() > 0 {
            // saturated iff the maximal minors are coprime
            prop_assert!(minor_gcd(&k, k.cols()).is_one());
            // an integral kernel vector built from the rational kernel lies in the lattice
            let y: Vec<BigInt> = probe.iter().take(k.cols()).map(|&x| BigInt::from(x)).collect();
            let v = k.mul_vec(&y);
            let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() {
                let prim: Vec<Rational> = v.iter().map(|x| to_rational(&(x / &g))).collect();
                let s = solve_rational(&k, &prim).expect("kernel vector is in the span");
                prop_assert!(s.values.iter().all(|x| x.is_integer()));
            }
        }
    }

    #[test]
    fn saturation_and_quotient_agree(b in (1usize..=4, 1usize..=3).prop_flat_map(|(r, c)| matrix(r, c))) {
        let s = saturate_columns(&b);
        let q = quotient_map(&b);
        prop_assert_eq!(s.cols(), b.rank());
        prop_assert!(q.mul(&b).is_zero());
        prop_assert_eq!(q.rows(), b.rows() - b.rank());
        if q.rows() > 0 {
            // surjective onto Z^(n-k)
            prop_assert!(minor_gcd(&q, q.rows()).is_one());
        }
        if s.cols() > 0 {
            prop_assert!(minor_gcd(&s, s.cols()).is_one());
            prop_assert!(q.mul(&s).is_zero());
        }
    }

    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = Rational::new(n.into(), d.into());
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
}
