use serde::Serialize;
use serde_json::{json, Value};

use super::{NetworkSpec, ReactionKind};
use crate::linalg::dense::{self, Mat};
use crate::linalg::exact::{self, q, Q};
use crate::scalar::Real;

/// Rank threshold for floating point kernels, relative to `||Gamma~||_F`.
pub const KERNEL_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaTildeForm {
    /// `(Delta U; Gamma)`, `(n+1) x r`.
    Stacked,
    /// `[[0^T, 1], [Gamma, 0]]`, `(n+1) x (r+1)`.
    Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrices<R> {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// `n x m`, rows are species.
    pub y: Vec<Vec<i64>>,
    /// `m x r`.
    pub d: Vec<Vec<i64>>,
    /// `m x (#pairs)`; column `j` is the `D` column of the forward member
    /// of pair `j`.
    pub b: Vec<Vec<i64>>,
    /// `n x r`.
    pub gamma: Vec<Vec<i64>>,
    /// `(forward, backward)` per column of `B`.
    pub pairs: Vec<(usize, usize)>,
    /// Leading columns of `B` that belong to chemical pairs.
    pub cr_pairs: usize,
    pub form: GammaTildeForm,
    /// Rows are `(U, N_1, .., N_n)`.
    pub gamma_tilde: Mat<R>,
    /// Basis of `ker Gamma~^T`, vectors of length `n+1`.
    pub ker_basis: Vec<Vec<R>>,
    /// Primitive integer form of `ker_basis` when the elimination was exact.
    pub ker_exact: Option<Vec<Vec<i64>>>,
    /// Basis of `Im Gamma~`.
    pub im_basis: Vec<Vec<R>>,
    /// Primitive integer basis of `ker Gamma`, vectors of length `r`.
    pub ker_gamma: Vec<Vec<i64>>,
}

/// The three subspaces returned by [`kernel_image`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelImage<R> {
    pub ker_gamma_tilde_t: Vec<Vec<R>>,
    pub im_gamma_tilde: Vec<Vec<R>>,
    pub ker_gamma: Vec<Vec<i64>>,
}

fn int_matrix_q(m: &[Vec<i64>]) -> Vec<Vec<Q>> {
    m.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect()
}

fn primitive_rows(vs: Vec<Vec<Q>>) -> Vec<Vec<i64>> {
    vs.iter()
        .map(|v| exact::to_i64_vec(&exact::primitive_integer(v)).expect("kernel entries fit in i64"))
        .collect()
}

fn mul_int(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(&x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn build_matrices<R: Real>(spec: &NetworkSpec<R>) -> Matrices<R> {
    let n = spec.n_species();
    let m = spec.n_complexes();
    let r = spec.n_reactions();

    let columns: Vec<Vec<i64>> = spec.complexes.iter().map(|c| c.dense(n)).collect();
    let y: Vec<Vec<i64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();

    let mut d = vec![vec![0i64; r]; m];
    for (j, rx) in spec.reactions.iter().enumerate() {
        let s = spec.complex_index(&rx.substrate);
        let p = spec.complex_index(&rx.product);
        d[s][j] -= 1;
        d[p][j] += 1;
    }
    let gamma = mul_int(&y, &d);

    let pairs = spec.pairs();
    let cr_pairs = spec.chemical_pairs().len();
    let b: Vec<Vec<i64>> = (0..m)
        .map(|i| pairs.iter().map(|&(f, _)| d[i][f]).collect())
        .collect();

    let stacked = !spec.has_open_boundary();
    let (form, gamma_tilde) = if stacked {
        let mut gt = Mat::zeros(n + 1, r);
        for j in 0..r {
            // constant in this branch; the temperature argument is unused
            gt[(0, j)] = spec.energy_change(j, R::one());
            for i in 0..n {
                gt[(i + 1, j)] = R::lit(gamma[i][j] as f64);
            }
        }
        (GammaTildeForm::Stacked, gt)
    } else {
        let mut gt = Mat::zeros(n + 1, r + 1);
        gt[(0, r)] = R::one();
        for i in 0..n {
            for j in 0..r {
                gt[(i + 1, j)] = R::lit(gamma[i][j] as f64);
            }
        }
        (GammaTildeForm::Block, gt)
    };

    let integral = gamma_tilde.data.iter().all(|x| x.fract() == R::zero());
    let (ker_basis, ker_exact, im_basis) = if integral {
        let gt_q: Vec<Vec<Q>> = gamma_tilde
            .to_rows()
            .iter()
            .map(|row| row.iter().map(|x| q(x.to_i64().expect("integral entry"))).collect())
            .collect();
        let gt_t = exact::transpose(&gt_q, gamma_tilde.cols);
        let ker = primitive_rows(exact::kernel(&gt_t, n + 1));
        // image: pivot columns of Gamma~ itself
        let mut w = gt_q.clone();
        let pivots = exact::rref(&mut w);
        let im: Vec<Vec<R>> = pivots.iter().map(|&c| gamma_tilde.column(c)).collect();
        let ker_r: Vec<Vec<R>> = ker
            .iter()
            .map(|v| v.iter().map(|&x| R::lit(x as f64)).collect())
            .collect();
        (ker_r, Some(ker), im)
    } else {
        let tol = R::lit(KERNEL_RTOL);
        (
            dense::null_space(&gamma_tilde.transpose(), tol),
            None,
            dense::column_space(&gamma_tilde, tol),
        )
    };

    let ker_gamma = primitive_rows(exact::kernel(&int_matrix_q(&gamma), r));

    Matrices {
        n,
        m,
        r,
        y,
        d,
        b,
        gamma,
        pairs,
        cr_pairs,
        form,
        gamma_tilde,
        ker_basis,
        ker_exact,
        im_basis,
        ker_gamma,
    }
}

pub fn kernel_image<R: Real>(mats: &Matrices<R>) -> KernelImage<R> {
    KernelImage {
        ker_gamma_tilde_t: mats.ker_basis.clone(),
        im_gamma_tilde: mats.im_basis.clone(),
        ker_gamma: mats.ker_gamma.clone(),
    }
}

impl<R: Real> Matrices<R> {
    /// `Y B`, `n x (#pairs)`.
    pub fn yb(&self) -> Vec<Vec<i64>> {
        mul_int(&self.y, &self.b)
    }

    /// Columns of `B` for chemical pairs (`B_CR`) or flux pairs (`B_IO`).
    pub fn b_columns(&self, chemical: bool) -> std::ops::Range<usize> {
        if chemical {
            0..self.cr_pairs
        } else {
            self.cr_pairs..self.pairs.len()
        }
    }

    /// Column `j` of `Gamma` as integers.
    pub fn gamma_column(&self, j: usize) -> Vec<i64> {
        self.gamma.iter().map(|row| row[j]).collect()
    }

    /// Image/kernel agreement check: `Im(YB) = Im Gamma` and `ker(B^T Y^T) = ker Gamma^T`,
    /// both in exact arithmetic.
    pub fn pairing_preserves_subspaces(&self) -> bool {
        let yb_t = exact::transpose(&int_matrix_q(&self.yb()), self.pairs.len());
        let g_t = exact::transpose(&int_matrix_q(&self.gamma), self.r);
        // spans of the column sets
        let image = exact::same_span(&yb_t, &g_t);
        let ker_yb = exact::kernel(&yb_t, self.n);
        let ker_g = exact::kernel(&g_t, self.n);
        let kernel = if ker_yb.is_empty() || ker_g.is_empty() {
            ker_yb.len() == ker_g.len()
        } else {
            exact::same_span(&ker_yb, &ker_g)
        };
        image && kernel
    }

    /// `max_c |c^T Gamma~|` over the kernel basis.
    pub fn kernel_residual(&self) -> R {
        let mut worst = R::zero();
        for c in &self.ker_basis {
            for x in self.gamma_tilde.tr_mul_vec(c) {
                worst = worst.max(x.abs());
            }
        }
        worst
    }

    /// Stable JSON schema; dense matrices are arrays of columns.
    pub fn to_json<S: Real>(&self, spec: &NetworkSpec<S>) -> Value {
        fn cols_i(m: &[Vec<i64>], ncols: usize) -> Value {
            json!((0..ncols).map(|j| m.iter().map(|row| row[j]).collect::<Vec<_>>()).collect::<Vec<_>>())
        }
        let ncols = |m: &[Vec<i64>], fallback: usize| m.first().map_or(fallback, Vec::len);
        let gt: Vec<Vec<f64>> = (0..self.gamma_tilde.cols)
            .map(|j| self.gamma_tilde.column(j).iter().map(|x| x.to_f64_lossy()).collect())
            .collect();
        let f = |vs: &[Vec<R>]| -> Vec<Vec<f64>> {
            vs.iter().map(|v| v.iter().map(|x| x.to_f64_lossy()).collect()).collect()
        };
        let kinds: Vec<ReactionKind> = spec.reactions.iter().map(|r| r.kind).collect();
        json!({
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "species": spec.species().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
            "complexes": spec.complexes.iter().map(|c| c.render(spec.species())).collect::<Vec<_>>(),
            "kinds": kinds,
            "pairs": self.pairs,
            "Y": cols_i(&self.y, ncols(&self.y, self.m)),
            "D": cols_i(&self.d, self.r),
            "B": cols_i(&self.b, self.pairs.len()),
            "Gamma": cols_i(&self.gamma, self.r),
            "GammaTilde_form": self.form,
            "GammaTilde": gt,
            "ker_GammaTilde_T": f(&self.ker_basis),
            "ker_GammaTilde_T_integer": self.ker_exact,
            "im_GammaTilde": f(&self.im_basis),
            "ker_Gamma": self.ker_gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn example(mode: &str) -> NetworkSpec<f64> {
        let text = format!(
            "[constants]\nT_env = 1\nenergy_mode = {mode}\n[species]\nX1 {{ p = 1.5 }}\nX2 {{ p = 1.5 }}\nX3 {{ p = 1.5 }}\n[reactions]\nX1 + X2 <-> X3 {{ kf = 2, kb = 1 }}\n"
        );
        parse_network(&text).unwrap()
    }

    fn as_q(vs: &[Vec<i64>]) -> Vec<Vec<Q>> {
        vs.iter().map(|v| v.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn example_network_matrices() {
        let s = example("isolated");
        let mt = build_matrices(&s);
        assert_eq!(mt.d, vec![vec![-1, 1], vec![1, -1]]);
        assert_eq!(mt.y, vec![vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(mt.gamma_column(0), vec![-1, -1, 1]);
        assert_eq!(mt.gamma_column(1), vec![1, 1, -1]);
        assert_eq!(mt.b, vec![vec![-1], vec![1]]);
        assert_eq!(mt.form, GammaTildeForm::Stacked);
        assert_eq!(mt.gamma_tilde.row(0), &[0.0, 0.0]);
        let expected = as_q(&[vec![1, 0, 0, 0], vec![0, 1, 0, 1], vec![0, 0, 1, 1]]);
        assert!(exact::same_span(&as_q(mt.ker_exact.as_ref().unwrap()), &expected));
        assert_eq!(mt.kernel_residual(), 0.0);
        assert!(mt.ker_gamma.iter().any(|v| v == &vec![1, 1]));
        assert_eq!(mt.ker_basis.len() + mt.im_basis.len(), mt.n + 1);
    }

    #[test]
    fn isothermal_energy_row() {
        let s = example("isothermal");
        let mt = build_matrices(&s);
        assert_eq!(mt.form, GammaTildeForm::Stacked);
        let row = mt.gamma_tilde.row(0);
        assert!((row[0] + 1.5).abs() < 1e-15 && (row[1] - 1.5).abs() < 1e-15);
        assert!(mt.ker_exact.is_none());
        assert_eq!(mt.ker_basis.len(), 3);
        assert!(mt.kernel_residual() < 1e-12);
    }

    #[test]
    fn heat_only_block_form() {
        let s: NetworkSpec<f64> =
            parse_network("[constants]\nT_env = 2\n[species]\nA { p = 1.5 }\n[reactions]\n@heat { k = 1 }\n").unwrap();
        let mt = build_matrices(&s);
        assert_eq!(mt.form, GammaTildeForm::Block);
        assert_eq!(mt.gamma, vec![vec![0]]);
        assert_eq!(mt.gamma_tilde.row(0), &[0.0, 1.0]);
        assert_eq!(mt.gamma_tilde.rows, 2);
        assert_eq!(mt.gamma_tilde.cols, 2);
        assert_eq!(mt.ker_exact, Some(vec![vec![0, 1]]));
    }

    #[test]
    fn triangle_kernel_dimension() {
        let text = "[species]\nA { p = 1 }\nB { p = 1 }\nC { p = 1 }\n[reactions]\nA <-> B {kf=1,kb=1}\nB <-> C {kf=1,kb=1}\nC <-> A {kf=1,kb=1}\n";
        let s: NetworkSpec<f64> = parse_network(text).unwrap();
        let mt = build_matrices(&s);
        assert_eq!(mt.ker_gamma.len(), 4);
        let cycle = vec![q(1), q(0), q(1), q(0), q(1), q(0)];
        let mut with = as_q(&mt.ker_gamma);
        let before = exact::rank(&with);
        with.push(cycle);
        assert_eq!(exact::rank(&with), before);
        assert!(mt.pairing_preserves_subspaces());
    }
}
