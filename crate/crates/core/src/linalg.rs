//! Dense helpers on a finite active index set.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Sorted union of index lists.
pub(crate) fn union_indices<'a, I: IntoIterator<Item = &'a [usize]>>(sets: I) -> Vec<usize> {
    let mut out: Vec<usize> = sets.into_iter().flatten().copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Signature of the Lorentz form restricted to `active`: `+1` at index 0, `-1` elsewhere.
pub(crate) fn lorentz_signature(active: &[usize]) -> DVector<f64> {
    DVector::from_iterator(
        active.len(),
        active.iter().map(|&i| if i == 0 { 1.0 } else { -1.0 }),
    )
}

pub(crate) fn form(sig: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .zip(sig.iter())
        .map(|((a, b), s)| a * b * s)
        .sum()
}

/// Re-expresses `block` (acting on `from`) on the larger index set `to`,
/// identity on the new indices. `from` must be a subset of `to`.
pub(crate) fn expand_block(block: &DMatrix<f64>, from: &[usize], to: &[usize]) -> DMatrix<f64> {
    if from == to {
        return block.clone();
    }
    let pos: Vec<usize> = from
        .iter()
        .map(|i| to.binary_search(i).expect("active set must be a subset"))
        .collect();
    let n = to.len();
    let mut out = DMatrix::identity(n, n);
    let dst = out.as_mut_slice();
    // column-major on both sides
    for (col, src) in block.as_slice().chunks_exact(from.len().max(1)).enumerate() {
        let base = pos[col] * n;
        for (&pa, &v) in pos.iter().zip(src) {
            dst[base + pa] = v;
        }
    }
    out
}

/// The product of `a` (on `sa`) and `b` (on `sb`), both extended by the
/// identity, as a block on `sa ∪ sb`. Only the rows of `sa` (or the columns of
/// `sb`, whichever set is smaller) differ from the other factor.
pub(crate) fn block_product(
    a: &DMatrix<f64>,
    sa: &[usize],
    b: &DMatrix<f64>,
    sb: &[usize],
) -> (Vec<usize>, DMatrix<f64>) {
    let all = union_indices([sa, sb]);
    let pos = |s: &[usize]| -> Vec<usize> {
        s.iter()
            .map(|i| all.binary_search(i).expect("subset"))
            .collect()
    };
    if sa.len() <= sb.len() {
        let be = expand_block(b, sb, &all);
        let pa = pos(sa);
        let rows = be.select_rows(&pa);
        let new_rows = a * rows;
        let mut out = be;
        for (k, &r) in pa.iter().enumerate() {
            out.set_row(r, &new_rows.row(k));
        }
        (all, out)
    } else {
        let ae = expand_block(a, sa, &all);
        let pb = pos(sb);
        let cols = ae.select_columns(&pb);
        let new_cols = cols * b;
        let mut out = ae;
        for (k, &c) in pb.iter().enumerate() {
            out.set_column(c, &new_cols.column(k));
        }
        (all, out)
    }
}

/// Gram–Schmidt for the diagonal form `sig`, dropping vectors whose residual
/// is negligible relative to their size. The first vector is assumed
/// non-isotropic; with an indefinite `sig` callers place a positive vector first.
pub(crate) fn gram_schmidt(vectors: &[DVector<f64>], sig: &DVector<f64>) -> Vec<DVector<f64>> {
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    for v in vectors {
        let scale = v.norm_squared();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for (b, eps) in &basis {
                let c = form(sig, &w, b) * eps;
                w.axpy(-c, b, 1.0);
            }
        }
        let q = form(sig, &w, &w);
        if q.abs() <= 1e-20 * scale.max(1.0) || w.norm_squared() <= 1e-20 * scale {
            continue;
        }
        let eps = q.signum();
        w /= q.abs().sqrt();
        basis.push((w, eps));
    }
    basis.into_iter().map(|(b, _)| b).collect()
}

/// Builds the form-preserving operator sending each `sources[a]` to
/// `targets[a]`, acting on `span(sources ∪ targets)` and as the identity on its
/// orthogonal complement.
///
/// `sources` and `targets` must each be orthonormal for `sig` with matching
/// signatures. For an indefinite `sig` the first source must be the positive
/// vector.
pub(crate) fn witt_extension(
    sources: &[DVector<f64>],
    targets: &[DVector<f64>],
    sig: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = sig.len();
    let src_all: Vec<DVector<f64>> = sources.iter().chain(targets.iter()).cloned().collect();
    let tgt_all: Vec<DVector<f64>> = targets.iter().chain(sources.iter()).cloned().collect();
    let src = gram_schmidt(&src_all, sig);
    let tgt = gram_schmidt(&tgt_all, sig);
    if src.len() != tgt.len() || src.len() < sources.len() {
        return Err(Error::Numerical(format!(
            "frame completion mismatch ({} vs {})",
            src.len(),
            tgt.len()
        )));
    }
    // Pair completion vectors by signature; the prescribed ones stay aligned.
    let k = sources.len();
    let split = |vs: &[DVector<f64>]| {
        let (pos, neg): (Vec<_>, Vec<_>) =
            vs[k..].iter().cloned().partition(|v| form(sig, v, v) > 0.0);
        (pos, neg)
    };
    let (sp, sn) = split(&src);
    let (tp, tn) = split(&tgt);
    if sp.len() != tp.len() || sn.len() != tn.len() {
        return Err(Error::Numerical(
            "frame completion signature mismatch".into(),
        ));
    }
    let mut m = DMatrix::identity(n, n);
    let pairs = src[..k]
        .iter()
        .zip(tgt[..k].iter())
        .chain(sp.iter().zip(tp.iter()))
        .chain(sn.iter().zip(tn.iter()));
    for (s, t) in pairs {
        let eps = form(sig, s, s).signum();
        // row functional x -> eps * (x, s)
        let row = s.component_mul(sig) * eps;
        let diff = t - s;
        m += &diff * row.transpose();
    }
    Ok(m)
}

/// One block of the real normal form of an orthogonal matrix.
#[derive(Debug, Clone)]
pub(crate) enum NormalBlock {
    /// Eigenvector with eigenvalue `+1`.
    Fixed(DVector<f64>),
    /// Eigenvector with eigenvalue `-1`.
    Flip(DVector<f64>),
    /// `A u = cos(angle) u + sin(angle) w`, `A w = -sin(angle) u + cos(angle) w`,
    /// with `angle` in `(0, pi)`.
    Rotation {
        u: DVector<f64>,
        w: DVector<f64>,
        angle: f64,
    },
}

/// Real normal form of an orthogonal matrix through its real Schur form.
pub(crate) fn orthogonal_normal_form(a: &DMatrix<f64>) -> Result<Vec<NormalBlock>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let two = i + 1 < n && t[(i + 1, i)].abs() > 1e-13;
        if !two {
            let v = q.column(i).into_owned();
            if t[(i, i)] >= 0.0 {
                blocks.push(NormalBlock::Fixed(v));
            } else {
                blocks.push(NormalBlock::Flip(v));
            }
            i += 1;
            continue;
        }
        let b = t.fixed_view::<2, 2>(i, i).into_owned();
        let q1 = q.column(i).into_owned();
        let q2 = q.column(i + 1).into_owned();
        if b.determinant() > 0.0 {
            // A q1 = b00 q1 + b10 q2; the block is a rotation up to rounding
            let cos = 0.5 * (b[(0, 0)] + b[(1, 1)]);
            let sin = 0.5 * (b[(1, 0)] - b[(0, 1)]);
            let mut angle = sin.atan2(cos);
            let mut w = q2;
            if angle < 0.0 {
                angle = -angle;
                w = -w;
            }
            blocks.push(NormalBlock::Rotation { u: q1, w, angle });
        } else {
            // a reflection inside the plane: split into its +1 and -1 axes
            let sym = (b + b.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            for k in 0..2 {
                let c = eig.eigenvectors.column(k);
                let v = &q1 * c[0] + &q2 * c[1];
                if eig.eigenvalues[k] >= 0.0 {
                    blocks.push(NormalBlock::Fixed(v));
                } else {
                    blocks.push(NormalBlock::Flip(v));
                }
            }
        }
        i += 2;
    }
    Ok(blocks)
}

/// Index groups of the connected components of the nonzero pattern of `m`.
pub(crate) fn block_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for r in 0..n {
        for c in (r + 1)..n {
            if m[(r, c)] != 0.0 || m[(c, r)] != 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// [`orthogonal_normal_form`] of each decoupled block, with vectors expressed
/// on the block's own positions.
pub(crate) fn orthogonal_normal_form_components(
    a: &DMatrix<f64>,
) -> Result<Vec<(Vec<usize>, Vec<NormalBlock>)>> {
    block_components(a)
        .into_iter()
        .map(|idx| {
            let sub = a.select_rows(&idx).select_columns(&idx);
            Ok((idx, orthogonal_normal_form(&sub)?))
        })
        .collect()
}

/// [`orthogonal_normal_form`] computed separately on each decoupled block.
pub(crate) fn orthogonal_normal_form_split(a: &DMatrix<f64>) -> Result<Vec<NormalBlock>> {
    let n = a.nrows();
    let embed = |idx: &[usize], v: &DVector<f64>| {
        let mut out = DVector::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            out[i] = v[k];
        }
        out
    };
    let mut blocks = Vec::new();
    for (idx, local) in orthogonal_normal_form_components(a)? {
        for b in local {
            blocks.push(match b {
                NormalBlock::Fixed(v) => NormalBlock::Fixed(embed(&idx, &v)),
                NormalBlock::Flip(v) => NormalBlock::Flip(embed(&idx, &v)),
                NormalBlock::Rotation { u, w, angle } => NormalBlock::Rotation {
                    u: embed(&idx, &u),
                    w: embed(&idx, &w),
                    angle,
                },
            });
        }
    }
    Ok(blocks)
}

/// Null space of `m` (columns orthonormal), singular values below `tol` counted as zero.
pub(crate) fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to a square matrix so the SVD returns a full right basis
    let rows = m.nrows().max(n);
    let mut sq = DMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
