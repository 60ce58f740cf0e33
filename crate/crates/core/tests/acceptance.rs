//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropcount::counting::{count_with_retries, count_with_threads, kontsevich_oracle, mikhalkin_multiplicity, CountProblem, CountResult};
use tropcount::exactmath::{int, integer_kernel, lattice_index, smith_normal_form, IntMatrix, Rational};
use tropcount::maps::{subdivide, validate, DiscreteData, TropicalStableMap};
use tropcount::moduli::{
    assemble_complex, contains, face_inclusion, face_types, gkm_embedding, hexagon_fan, moduli_cone, unimodular_equivalence, Membership,
};
use tropcount::polyhedral::Fan;

const HEIGHT: u64 = 1000;

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn pt(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// ---- criteria 1 and 2 ----

fn toy_complex() -> String {
    let t = Instant::now();
    let c = assemble_complex(&DiscreteData::new(p2(), p2_contacts(1), 0).unwrap()).unwrap();
    let el = t.elapsed();
    assert_eq!(c.f_vector(), vec![1, 6, 6]);
    assert!(el < Duration::from_secs(1), "took {}", secs(el));
    format!("f-vector {:?} in {}", c.f_vector(), secs(el))
}

fn hexagon() -> String {
    let t = Instant::now();
    let c = assemble_complex(&DiscreteData::new(p2(), p2_contacts(1), 0).unwrap()).unwrap();
    let e = gkm_embedding(&c, 1).unwrap();
    let m = unimodular_equivalence(&e, &hexagon_fan()).expect("no unimodular equivalence");
    let el = t.elapsed();
    assert_eq!(e.ambient_rank, 2);
    assert!(m.det().abs().is_one());
    assert!(el < Duration::from_secs(1), "took {}", secs(el));
    format!("rank {}, {} rays, equivalence found in {}", e.ambient_rank, e.image_rays.len(), secs(el))
}

// ---- criteria 3, 6, 10 ----

struct Run {
    d: usize,
    problem: CountProblem,
    result: CountResult,
    elapsed: Duration,
}

fn plane_count(d: usize, seed: u64, threads: usize) -> Run {
    let gamma = DiscreteData::new(p2(), p2_contacts(d), 3 * d - 1).unwrap();
    let t = Instant::now();
    let result = count_with_retries(&gamma, &vec![tropcount::counting::SubspaceSpec::point(2); 3 * d - 1], seed, HEIGHT, 5, threads).unwrap();
    let elapsed = t.elapsed();
    let problem = CountProblem::points(gamma, result.seed, HEIGHT).unwrap();
    Run { d, problem, result, elapsed }
}

fn correspondence(runs: &mut Vec<Run>) -> String {
    let mut parts = Vec::new();
    for d in 1..=3usize {
        let oracle = kontsevich_oracle(d as u64);
        let limit = if d <= 2 { Duration::from_secs(10) } else { Duration::from_secs(600) };
        let mut totals = Vec::new();
        let mut slowest = Duration::ZERO;
        for seed in [1u64, 101, 201] {
            let run = plane_count(d, seed, threads());
            assert_eq!(run.result.total, oracle, "d = {d}, seed {seed}");
            slowest = slowest.max(run.elapsed);
            totals.push(run.result.total.clone());
            runs.push(run);
        }
        assert!(totals.windows(2).all(|w| w[0] == w[1]));
        assert!(slowest < limit, "d = {d} took {}", secs(slowest));
        parts.push(format!("d={d}: {oracle} (max {})", secs(slowest)));
    }
    parts.join(", ")
}

fn multiplicities(runs: &[Run]) -> String {
    assert!(runs.iter().any(|r| r.d == 3), "no degree-3 runs to check");
    let mut checked = 0;
    for r in runs {
        for c in &r.result.contributions {
            assert_eq!(mikhalkin_multiplicity(&c.ty, &r.problem).unwrap(), c.multiplicity, "{}", c.key);
            checked += 1;
        }
    }
    format!("{checked} contributing types agree")
}

fn determinism(runs: &[Run]) -> String {
    let text = |p: &CountProblem, r: &CountResult| serde_json::to_string(&r.to_json(p)).unwrap();
    let mut checked = 0;
    for d in [2usize, 3] {
        let many = runs.iter().find(|r| r.d == d).map(|r| text(&r.problem, &r.result));
        let problem = CountProblem::points(DiscreteData::new(p2(), p2_contacts(d), 3 * d - 1).unwrap(), 1, HEIGHT).unwrap();
        let one = text(&problem, &count_with_threads(&problem, 1).unwrap());
        let four = text(&problem, &count_with_threads(&problem, 4).unwrap());
        let again = text(&problem, &count_with_threads(&problem, 4).unwrap());
        assert_eq!(one, four, "d = {d}: 1 vs 4 threads");
        assert_eq!(four, again, "d = {d}: repeated run");
        if let Some(m) = many {
            if runs.iter().find(|r| r.d == d).unwrap().result.seed == 1 {
                assert_eq!(one, m, "d = {d}: 1 vs {} threads", threads());
            }
        }
        checked += 1;
    }
    format!("{checked} problems byte-identical across 1, 4 and {} threads and repeated runs", threads())
}

// ---- criterion 4 ----

/// Rank over Q by plain Gaussian elimination.
fn rank_q(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                let pivot = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

fn bidegree_one_one() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // curves a + bx + cy + dxy through three random points: projectivized kernel of a 3x4 system
    let rows: Vec<Vec<Rational>> = (0..3)
        .map(|_| {
            let x = Rational::new(rng.gen_range(-50..=50i64).into(), rng.gen_range(1..=9i64).into());
            let y = Rational::new(rng.gen_range(-50..=50i64).into(), rng.gen_range(1..=9i64).into());
            vec![int(1), x.clone(), y.clone(), x * y]
        })
        .collect();
    let kernel = 4 - rank_q(rows);
    assert_eq!(kernel, 1);
    let oracle = BigInt::from(kernel);
    let t = Instant::now();
    let gamma = DiscreteData::new(p1xp1(), p1xp1_contacts(1, 1), 3).unwrap();
    let mut seeds = Vec::new();
    for seed in [1u64, 2, 3, 4, 5] {
        let r = count_with_retries(&gamma, &vec![tropcount::counting::SubspaceSpec::point(2); 3], seed * 100, HEIGHT, 5, threads()).unwrap();
        assert_eq!(r.total, oracle, "seed {}", r.seed);
        seeds.push(r.seed);
    }
    let el = t.elapsed();
    assert!(el < Duration::from_secs(10), "took {}", secs(el));
    format!("1 over seeds {seeds:?} in {}", secs(el))
}

// ---- criteria 5 and 7 ----

fn random_case(rng: &mut ChaCha8Rng) -> (std::sync::Arc<Fan>, Vec<(usize, Vec<i64>)>) {
    let m = rng.gen_range(0..=3);
    if rng.gen_bool(0.5) {
        let d = rng.gen_range(1..=2);
        (p2(), labeled(&p2_contacts(d), m, 2))
    } else {
        let (a, b) = (rng.gen_range(0..=2), rng.gen_range(1..=2));
        let m = if a == 0 && b == 1 { m.max(1) } else { m };
        (p1xp1(), labeled(&p1xp1_contacts(a, b), m, 2))
    }
}

fn dimension_formula() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 100 {
        let (fan, legs) = random_case(&mut rng);
        let Some(f) = random_generic_map(&fan, &legs, &mut rng) else { continue };
        let n = legs.iter().filter(|(_, c)| c.iter().any(|&x| x != 0)).count();
        let m = legs.len() - n;
        let cone = moduli_cone(&fan, &f.ty).unwrap();
        let rows: Vec<Vec<Rational>> = (0..cone.constraint_matrix.rows())
            .map(|i| cone.constraint_matrix.row(i).iter().map(|x| Rational::from_integer(x.clone())).collect())
            .collect();
        let rank = if rows.is_empty() { 0 } else { rank_q(rows) };
        assert_eq!(cone.dimension, cone.ambient_dim - rank);
        assert_eq!(cone.dimension + 3, fan.rank() + m + n, "type with {} legs", legs.len());
        assert_eq!(contains(&cone, &f).unwrap(), Membership::Interior);
        checked += 1;
    }
    format!("{checked} random types, zero failures")
}

fn check_faces(fan: &Fan, parent: &TropicalStableMap, rng: &mut ChaCha8Rng) -> usize {
    let r = fan.rank();
    let pcone = moduli_cone(fan, &parent.ty).unwrap();
    let faces = face_types(fan, &parent.ty).unwrap();
    for face in &faces {
        assert_eq!(face.dimension + 1, pcone.dimension);
        let fcone = moduli_cone(fan, &face.ty).unwrap();
        assert_eq!(fcone.dimension, face.dimension);
        let nv = parent.ty.vertex_count();
        let mut x = vec![Rational::zero(); fcone.ambient_dim];
        for v in 0..nv {
            for k in 0..r {
                x[r * face.vertex_map[v] + k] = face.witness[r * v + k].clone();
            }
        }
        for (e, img) in face.edge_map.iter().enumerate() {
            if let Some(g) = img {
                x[r * face.ty.vertex_count() + g] = face.witness[r * nv + e].clone();
            }
        }
        assert_eq!(contains(&fcone, &fcone.map_at(&x, r)).unwrap(), Membership::Interior);
        let iota = face_inclusion(r, &parent.ty, &face.ty, &face.vertex_map, &face.edge_map);
        let mut sampled = 0;
        for _ in 0..50 {
            let z: Vec<Rational> = (0..fcone.dimension).map(|_| Rational::new(rng.gen_range(-3..=3i64).into(), 64.into())).collect();
            let y: Vec<Rational> = x.iter().zip(fcone.span_basis.mul_rational(&z)).map(|(a, b)| a + b).collect();
            if contains(&fcone, &fcone.map_at(&y, r)).unwrap() != Membership::Interior {
                continue;
            }
            let up = iota.mul_rational(&y);
            assert_eq!(contains(&pcone, &pcone.map_at(&up, r)).unwrap(), Membership::Boundary);
            sampled += 1;
        }
        assert!(sampled > 0);
    }
    faces.len()
}

fn faces() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut types, mut total) = (0, 0);
    while types < 20 {
        let (fan, legs) = random_case(&mut rng);
        let Some(f) = random_generic_map(&fan, &legs, &mut rng) else { continue };
        let n = check_faces(&fan, &f, &mut rng);
        assert!(n > 0);
        total += n + check_faces(&fan, &subdivide(&fan, &f).unwrap(), &mut rng);
        types += 1;
    }
    format!("{types} random types (and their subdivisions), {total} faces checked")
}

// ---- criterion 8 ----

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> IntMatrix {
    let v: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect();
    IntMatrix::from_i64_rows(&v, cols)
}

fn low_rank(rng: &mut ChaCha8Rng) -> IntMatrix {
    let (r, k, c) = (rng.gen_range(1..=4), rng.gen_range(1..=3), rng.gen_range(2..=5));
    random_matrix(rng, r, k).mul(&random_matrix(rng, k, c))
}

/// Determinant by cofactor expansion.
fn cofactor_det(a: &[Vec<BigInt>]) -> BigInt {
    if a.is_empty() {
        return BigInt::one();
    }
    let mut s = BigInt::zero();
    for j in 0..a.len() {
        let minor: Vec<Vec<BigInt>> = a[1..].iter().map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect()).collect();
        let t = &a[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    s
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

fn minor_gcd(a: &IntMatrix, k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rs in subsets(a.rows(), k) {
        for cs in subsets(a.cols(), k) {
            g = g.gcd(&cofactor_det(&a.select_rows(&rs).select_columns(&cs).row_vecs()));
        }
    }
    g
}

fn exactmath_suite() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=5));
        let a = random_matrix(&mut rng, r, c);
        let s = smith_normal_form(&a);
        assert_eq!(s.left.mul(&a).mul(&s.right), s.diag);
        assert!(cofactor_det(&s.left.row_vecs()).abs().is_one());
        assert!(cofactor_det(&s.right.row_vecs()).abs().is_one());
        let d = s.diagonal();
        for i in 0..s.diag.rows() {
            for j in 0..s.diag.cols() {
                assert!(i == j || s.diag[(i, j)].is_zero());
            }
        }
        let mut prod = BigInt::one();
        for (k, x) in d.iter().enumerate() {
            assert!(!x.is_negative());
            if k > 0 && !d[k - 1].is_zero() {
                assert!((x % &d[k - 1]).is_zero());
            }
            prod *= x;
            assert_eq!(prod, minor_gcd(&a, k + 1));
        }
    }
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let a = random_matrix(&mut rng, n, n);
        let det = cofactor_det(&a.row_vecs());
        match lattice_index(&a) {
            Ok(i) => assert_eq!(i, det.abs()),
            Err(_) => assert!(det.is_zero()),
        }
    }
    for i in 0..1000 {
        let a = if i % 2 == 0 {
            let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=5));
            random_matrix(&mut rng, r, c)
        } else {
            low_rank(&mut rng)
        };
        let k = integer_kernel(&a);
        let rows: Vec<Vec<Rational>> = a.row_vecs().into_iter().map(|r| r.into_iter().map(Rational::from_integer).collect()).collect();
        assert_eq!(k.cols(), a.cols() - rank_q(rows));
        assert!(a.mul(&k).is_zero());
        if k.cols() > 0 {
            assert!(minor_gcd(&k, k.cols()).is_one());
        }
    }
    "SNF, lattice index and kernel saturation: 1000 instances each".to_string()
}

// ---- criterion 9 ----

fn tripod(fan: &Fan) -> TropicalStableMap {
    TropicalStableMap::from_geometry(fan, vec![pt(&[0, 0])], &[], &[(1, 0, vec![1, 0]), (2, 0, vec![0, 1]), (3, 0, vec![-1, -1])]).unwrap()
}

fn rejected_with(fan: &Fan, f: &TropicalStableMap, condition: &str) {
    let r = validate(fan, f);
    assert!(!r.is_valid() && r.has(condition), "expected {condition}, got {:?}", r.violations);
}

fn mutations() -> String {
    let fan = p2();
    let t = tripod(&fan);
    assert!(validate(&fan, &t).is_valid());

    let mut weight = t.clone();
    weight.ty.legs[2].contact = vec![-2, -2];
    rejected_with(&fan, &weight, "balancing");

    let mut moved = t.clone();
    moved.positions[0] = pt(&[1, 1]);
    rejected_with(&fan, &moved, "vertex-cone");

    let two = TropicalStableMap::from_geometry(
        &fan,
        vec![pt(&[2, 1]), pt(&[1, 0])],
        &[(0, 1, vec![-1, -1], int(1))],
        &[(1, 0, vec![1, 0]), (2, 0, vec![0, 1]), (3, 1, vec![-1, -1])],
    )
    .unwrap();
    assert!(validate(&fan, &two).is_valid());
    let mut sign = two;
    sign.lengths[0] = tropcount::curves::EdgeLength::Finite(int(-1));
    rejected_with(&fan, &sign, "length-sign");

    // contracted component carrying two marked points is stable; dropping one makes it unstable
    let legs = [(1, 0, vec![1, 0]), (2, 0, vec![0, 1]), (3, 0, vec![-1, -1]), (4, 1, vec![0, 0]), (5, 1, vec![0, 0])];
    let stable = TropicalStableMap::from_geometry(&fan, vec![pt(&[0, 0]), pt(&[0, 0])], &[(0, 1, vec![0, 0], int(1))], &legs).unwrap();
    assert!(validate(&fan, &stable).is_valid());
    let unstable = TropicalStableMap::from_geometry(&fan, vec![pt(&[0, 0]), pt(&[0, 0])], &[(0, 1, vec![0, 0], int(1))], &legs[..4]).unwrap();
    rejected_with(&fan, &unstable, "stability");
    "tripod valid; balancing, vertex-cone, length-sign, stability mutations rejected".to_string()
}

// ---- driver ----

fn check(n: usize, name: &str, f: impl FnOnce() -> String) -> bool {
    let t = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f));
    let el = secs(t.elapsed());
    match out {
        Ok(detail) => {
            println!("criterion {n:>2} PASS  {name}: {detail} [{el}]");
            true
        }
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            println!("criterion {n:>2} FAIL  {name}: {msg} [{el}]");
            false
        }
    }
}

fn main() {
    let mut runs = Vec::new();
    let results = [
        check(1, "toy complex", toy_complex),
        check(2, "hexagon fan", hexagon),
        check(3, "plane curve counts", || correspondence(&mut runs)),
        check(4, "P1xP1 bidegree (1,1)", bidegree_one_one),
        check(5, "dimension formula", dimension_formula),
        check(6, "Mikhalkin multiplicity", || multiplicities(&runs)),
        check(7, "faces", faces),
        check(8, "exactmath properties", exactmath_suite),
        check(9, "validation mutations", mutations),
        check(10, "determinism", || determinism(&runs)),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
