use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{ConeComplex, ModuliCone, ModuliError};
use crate::exactmath::{content, quotient_map, solve_rational, to_rational, IntMatrix};
use crate::polyhedral::Fan;

/// Image of the moduli complex under the root-vertex position and leg distances.
#[derive(Clone, Debug)]
pub struct EmbeddedFan {
    pub ambient_rank: usize,
    pub root_label: usize,
    /// per cone: linear map from its span coordinates into Z^k
    pub lattice_maps: Vec<IntMatrix>,
    /// distinct primitive ray images, sorted
    pub image_rays: Vec<Vec<BigInt>>,
    /// per cone: indices into `image_rays` of the images of its rays
    pub image_cones: Vec<Vec<usize>>,
    /// indices of cones that are not faces of other cones
    pub maximal: Vec<usize>,
}

/// Rows mapping a cone's ambient coordinates to the embedding.
fn embedding_rows(cone: &ModuliCone, rank: usize, labels: &[usize], root_label: usize, quotient: &IntMatrix) -> Result<IntMatrix, ModuliError> {
    let ty = &cone.ty;
    let nv = ty.vertex_count();
    let amb = cone.ambient_dim;
    let leg = ty.leg(root_label).ok_or(ModuliError::UnknownLabel(root_label))?;
    // walk from the leg's vertex across 2-valent vertices to the stabilized vertex
    let mut v = leg.vertex;
    let mut came: Option<usize> = None;
    while ty.valence(v) < 3 {
        let next: Vec<(usize, usize)> = ty.neighbours(v).into_iter().filter(|(_, e, _)| Some(*e) != came).map(|(u, e, _)| (u, e)).collect();
        if next.len() != 1 {
            break;
        }
        came = Some(next[0].1);
        v = next[0].0;
    }
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for k in 0..rank {
        let mut row = vec![BigInt::zero(); amb];
        row[rank * v + k] = BigInt::one();
        rows.push(row);
    }
    let shape = ty.shape();
    let mut dist: Vec<Vec<BigInt>> = Vec::new();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            let mut row = vec![BigInt::zero(); amb];
            let (va, vb) = (ty.leg(a).unwrap().vertex, ty.leg(b).unwrap().vertex);
            for e in shape.path_edges(va, vb) {
                row[rank * nv + e] += 1;
            }
            dist.push(row);
        }
    }
    let dist = IntMatrix::from_rows(dist, amb);
    let projected = quotient.mul(&dist);
    for i in 0..projected.rows() {
        rows.push(projected.row(i).to_vec());
    }
    Ok(IntMatrix::from_rows(rows, amb))
}

fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = content(&v);
    if g.is_zero() {
        v
    } else {
        v.iter().map(|x| x / &g).collect()
    }
}

/// Embeds the complex into Z^k, k = rank + C(N,2) - N, using the leg `root_label`.
pub fn gkm_embedding(complex: &ConeComplex, root_label: usize) -> Result<EmbeddedFan, ModuliError> {
    if complex.cones.is_empty() {
        return Err(ModuliError::NotAssembled);
    }
    let gamma = &complex.gamma;
    let rank = gamma.fan().rank();
    let mut labels: Vec<usize> = gamma.contact_legs().iter().map(|c| c.0).chain(gamma.trivial_legs().iter().copied()).collect();
    labels.sort_unstable();
    if !labels.contains(&root_label) {
        return Err(ModuliError::UnknownLabel(root_label));
    }
    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    // translating the length of leg k changes every distance involving k
    let translations: Vec<Vec<BigInt>> = (0..n)
        .map(|k| pairs.iter().map(|&(i, j)| if i == k || j == k { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let quotient = if pairs.is_empty() {
        IntMatrix::zeros(0, 0)
    } else {
        quotient_map(&IntMatrix::from_columns(&translations, pairs.len()))
    };
    let mut lattice_maps = Vec::new();
    let mut ray_images: Vec<Option<Vec<BigInt>>> = Vec::new();
    for cone in &complex.cones {
        let e = embedding_rows(cone, rank, &labels, root_label, &quotient)?;
        let m = e.mul(&cone.span_basis);
        if cone.dimension == 1 {
            let mut ray = cone.span_basis.column(0);
            if cone.inequalities.mul_vec(&ray).iter().any(|x| x.is_negative()) {
                ray = ray.iter().map(|x| -x).collect();
            }
            ray_images.push(Some(primitive(e.mul_vec(&ray))));
        } else {
            ray_images.push(None);
        }
        lattice_maps.push(m);
    }
    let ambient_rank = lattice_maps[0].rows();
    let mut image_rays: Vec<Vec<BigInt>> = ray_images.iter().flatten().cloned().collect();
    image_rays.sort();
    image_rays.dedup();
    let image_cones = (0..complex.cones.len())
        .map(|c| {
            let mut ids: Vec<usize> = complex
                .faces_of(c)
                .into_iter()
                .filter_map(|f| ray_images[f].as_ref())
                .map(|r| image_rays.binary_search(r).unwrap())
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    Ok(EmbeddedFan { ambient_rank, root_label, lattice_maps, image_rays, image_cones, maximal: complex.maximal_cones() })
}

/// The complete fan in Z^2 with rays +-e1, +-e2, +-(e1+e2).
pub fn hexagon_fan() -> Fan {
    let rays = vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, 0], vec![-1, -1], vec![0, -1]];
    let cones = (0..6).map(|i| vec![i, (i + 1) % 6]).collect();
    Fan::new("hexagon", 2, rays, cones).expect("hexagon fan is valid")
}

fn big_rays(fan: &Fan) -> Vec<Vec<BigInt>> {
    fan.rays().iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn injective_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for i in (0..n).filter(|i| !t.contains(i)) {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// A unimodular matrix taking the embedded fan's maximal cones onto the maximal cones of
/// `target`, if one exists.
pub fn unimodular_equivalence(embedded: &EmbeddedFan, target: &Fan) -> Option<IntMatrix> {
    let r = target.rank();
    if embedded.ambient_rank != r || embedded.image_rays.len() != target.rays().len() {
        return None;
    }
    let rays = &embedded.image_rays;
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..rays.len() {
        let mut cand = basis.clone();
        cand.push(i);
        let cols: Vec<Vec<BigInt>> = cand.iter().map(|&j| rays[j].clone()).collect();
        if IntMatrix::from_columns(&cols, r).rank() == cand.len() {
            basis = cand;
        }
        if basis.len() == r {
            break;
        }
    }
    if basis.len() != r {
        return None;
    }
    let a_t = IntMatrix::from_rows(basis.iter().map(|&j| rays[j].clone()).collect(), r);
    let target_rays = big_rays(target);
    let mut target_cones: Vec<Vec<usize>> = target.maximal_cones().iter().map(|&c| target.cone(c).to_vec()).collect();
    target_cones.sort();
    for tuple in injective_tuples(target_rays.len(), r) {
        // row i of M solves A^T m_i = (target coordinates i)
        let mut m_rows = Vec::new();
        for i in 0..r {
            let b: Vec<_> = tuple.iter().map(|&t| to_rational(&target_rays[t][i])).collect();
            let Some(s) = solve_rational(&a_t, &b) else { break };
            if s.values.iter().any(|x| !x.is_integer()) {
                break;
            }
            m_rows.push(s.values.iter().map(|x| x.to_integer()).collect::<Vec<_>>());
        }
        if m_rows.len() != r {
            continue;
        }
        let m = IntMatrix::from_rows(m_rows, r);
        if !m.det().abs().is_one() {
            continue;
        }
        let mapped: Option<Vec<usize>> = rays.iter().map(|v| target_rays.iter().position(|t| *t == m.mul_vec(v))).collect();
        let Some(mapped) = mapped else { continue };
        let mut cones: Vec<Vec<usize>> = embedded
            .maximal
            .iter()
            .map(|&c| {
                let mut v: Vec<usize> = embedded.image_cones[c].iter().map(|&i| mapped[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        cones.sort();
        if cones == target_cones {
            return Some(m);
        }
    }
    None
}
