//! Triangulated unit sphere from icosahedron subdivision: cotangent-weight
//! stiffness, barycentric lumped mass, and the fifteen icosahedral mirror
//! planes stored as node permutations (exact polarization support).

use std::collections::BTreeMap;

use crate::linalg::Triplets;
use crate::scalar::Scalar;

use super::{Bc, Domain, DomainKind, GeometryError, Grid, Laplacian, Reflection};

pub fn trisphere<S: Scalar>(subdiv: usize) -> Result<Grid<S>, GeometryError> {
    if !(2..=7).contains(&subdiv) {
        return Err(GeometryError::BadParameter(
            "trisphere subdiv must be in [2, 7]".into(),
        ));
    }
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..subdiv {
        subdivide(&mut verts, &mut faces);
    }
    let nv = verts.len();

    // cotangent stiffness + barycentric mass from flat triangles
    let mut t = Triplets::new(nv);
    let mut w = vec![S::zero(); nv];
    let mut area_total = 0.0f64;
    for f in &faces {
        let [a, b, c] = *f;
        let (pa, pb, pc) = (verts[a], verts[b], verts[c]);
        let area = tri_area(pa, pb, pc);
        area_total += area;
        let third = S::of(area / 3.0);
        w[a] += third;
        w[b] += third;
        w[c] += third;
        // half-cotangent of the angle opposite each edge
        let contrib = [
            (a, b, cot_at(pc, pa, pb)),
            (b, c, cot_at(pa, pb, pc)),
            (c, a, cot_at(pb, pc, pa)),
        ];
        for (i, j, cot) in contrib {
            t.push_sym_pair(i, j, S::of(-0.5 * cot));
        }
    }

    let coords: Vec<Vec<S>> = verts
        .iter()
        .map(|v| vec![S::of(v[0]), S::of(v[1]), S::of(v[2])])
        .collect();
    let reflections = icosahedral_reflections(&verts);

    Ok(Grid {
        domain: Domain {
            kind: DomainKind::TriSphere { subdiv },
            coords,
            weights: w,
            boundary: vec![],
            diameter: S::PI(),
            total_volume: super::sphere_volume(2),
        },
        lap: Laplacian {
            stiffness: t.into_csr(),
            bc: Bc::Neumann,
        },
        reflections,
        elements: faces.iter().map(|f| f.to_vec()).collect(),
    })
    .map(|g| {
        debug_assert!((area_total - 4.0 * std::f64::consts::PI).abs() < 0.05 * area_total);
        g
    })
}

type V3 = [f64; 3];

fn icosahedron() -> (Vec<V3>, Vec<[usize; 3]>) {
    let p = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw: [V3; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let verts: Vec<V3> = raw.iter().map(|v| normalize(*v)).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (verts, faces)
}

fn normalize(v: V3) -> V3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn subdivide(verts: &mut Vec<V3>, faces: &mut Vec<[usize; 3]>) {
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, verts: &mut Vec<V3>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = midpoint.get(&key) {
            return m;
        }
        let va = verts[key.0];
        let vb = verts[key.1];
        let m = normalize([
            (va[0] + vb[0]) / 2.0,
            (va[1] + vb[1]) / 2.0,
            (va[2] + vb[2]) / 2.0,
        ]);
        verts.push(m);
        let idx = verts.len() - 1;
        midpoint.insert(key, idx);
        idx
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for f in faces.iter() {
        let [a, b, c] = *f;
        let ab = mid(a, b, verts);
        let bc = mid(b, c, verts);
        let ca = mid(c, a, verts);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    *faces = out;
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn tri_area(a: V3, b: V3, c: V3) -> f64 {
    let n = cross(sub(b, a), sub(c, a));
    0.5 * dot(n, n).sqrt()
}

/// Cotangent of the angle at `apex` in triangle (apex, p, q).
fn cot_at(apex: V3, p: V3, q: V3) -> f64 {
    let u = sub(p, apex);
    let v = sub(q, apex);
    let c = cross(u, v);
    dot(u, v) / dot(c, c).sqrt().max(1e-300)
}

/// The 15 mirror planes of the icosahedral group: normals are the C2 axes
/// (edge-midpoint directions of the base icosahedron). Each one is verified
/// to permute the subdivided node set exactly.
fn icosahedral_reflections<S: Scalar>(verts: &[V3]) -> Vec<Reflection<S>> {
    let (base_verts, base_faces) = icosahedron();
    let mut normals: Vec<V3> = Vec::new();
    for f in &base_faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            let m = normalize([
                (base_verts[a][0] + base_verts[b][0]) / 2.0,
                (base_verts[a][1] + base_verts[b][1]) / 2.0,
                (base_verts[a][2] + base_verts[b][2]) / 2.0,
            ]);
            let dup = normals.iter().any(|n| {
                let d = dot(*n, m).abs();
                d > 1.0 - 1e-9
            });
            if !dup {
                normals.push(m);
            }
        }
    }
    debug_assert_eq!(normals.len(), 15);

    // quantized lookup for reflected nodes
    let quant = |x: f64| (x * 1e7).round() as i64;
    let mut lookup: BTreeMap<(i64, i64, i64), usize> = BTreeMap::new();
    for (i, v) in verts.iter().enumerate() {
        lookup.insert((quant(v[0]), quant(v[1]), quant(v[2])), i);
    }
    let find = |p: V3| -> Option<usize> {
        let key = (quant(p[0]), quant(p[1]), quant(p[2]));
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    if let Some(&i) = lookup.get(&(key.0 + dx, key.1 + dy, key.2 + dz)) {
                        let v = verts[i];
                        let d = (v[0] - p[0]).abs() + (v[1] - p[1]).abs() + (v[2] - p[2]).abs();
                        if d < 1e-6 {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    };

    let mut out = Vec::new();
    for (k, nu) in normals.iter().enumerate() {
        let mut perm = vec![usize::MAX; verts.len()];
        let mut side = vec![0i8; verts.len()];
        let mut ok = true;
        for (i, v) in verts.iter().enumerate() {
            let d = dot(*v, *nu);
            let refl = [
                v[0] - 2.0 * d * nu[0],
                v[1] - 2.0 * d * nu[1],
                v[2] - 2.0 * d * nu[2],
            ];
            match find(refl) {
                Some(j) => {
                    perm[i] = j;
                    side[i] = if d > 1e-9 {
                        1
                    } else if d < -1e-9 {
                        -1
                    } else {
                        0
                    };
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(Reflection {
                label: format!("ico_plane_{k}"),
                normal: Some(vec![S::of(nu[0]), S::of(nu[1]), S::of(nu[2])]),
                perm,
                side,
            });
        }
    }
    out
}
