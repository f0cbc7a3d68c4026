//! Infeasible primal-dual path following (HKM direction, Mehrotra corrector)
//! for one semidefinite block plus nonnegative and free variables.
//!
//! ```text
//! (P) min <C,X> + cl.xl + cf.xf   s.t. A(X) + Al xl + Af xf = b,  X PSD, xl >= 0
//! (D) max b.y   s.t. C - A*(y) = Z PSD,  cl - Al' y = zl >= 0,  Af' y = cf
//! ```

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt;
use faer::linalg::triangular_solve;
use faer::{Mat, Par, Side};
use serde::{Deserialize, Serialize};

/// Constraint data. Row matrices are kept as full (both triangles) triplets.
pub(crate) struct StdForm {
    pub s: usize,
    pub row_ptr: Vec<usize>,
    pub ent_p: Vec<u32>,
    pub ent_q: Vec<u32>,
    pub ent_a: Vec<f64>,
    pub c: Mat<f64>,
    pub b: Vec<f64>,
    /// Columns of `Al`: `(row, coefficient)`.
    pub al: Vec<Vec<(usize, f64)>>,
    pub cl: Vec<f64>,
    pub af: Vec<Vec<(usize, f64)>>,
    pub cf: Vec<f64>,
}

impl StdForm {
    pub fn new(s: usize) -> Self {
        Self {
            s,
            row_ptr: vec![0],
            ent_p: Vec::new(),
            ent_q: Vec::new(),
            ent_a: Vec::new(),
            c: Mat::zeros(s, s),
            b: Vec::new(),
            al: Vec::new(),
            cl: Vec::new(),
            af: Vec::new(),
            cf: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    /// Append a row from upper-triangle triplets; returns its index.
    pub fn push_row(&mut self, upper: &[(usize, usize, f64)], b: f64) -> usize {
        for &(p, q, a) in upper {
            self.ent_p.push(p as u32);
            self.ent_q.push(q as u32);
            self.ent_a.push(a);
            if p != q {
                self.ent_p.push(q as u32);
                self.ent_q.push(p as u32);
                self.ent_a.push(a);
            }
        }
        self.row_ptr.push(self.ent_a.len());
        self.b.push(b);
        self.b.len() - 1
    }

    fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    fn a_op(&self, x: &Mat<f64>) -> Vec<f64> {
        (0..self.rows())
            .map(|i| {
                self.row(i)
                    .map(|e| self.ent_a[e] * x[(self.ent_p[e] as usize, self.ent_q[e] as usize)])
                    .sum()
            })
            .collect()
    }

    fn a_adj(&self, y: &[f64]) -> Mat<f64> {
        let mut m = Mat::zeros(self.s, self.s);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for e in self.row(i) {
                    m[(self.ent_p[e] as usize, self.ent_q[e] as usize)] += yi * self.ent_a[e];
                }
            }
        }
        m
    }

    fn al_mul(&self, xl: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (col, &x) in self.al.iter().zip(xl) {
            for &(i, a) in col {
                out[i] += a * x;
            }
        }
        out
    }

    fn al_t_mul(&self, y: &[f64]) -> Vec<f64> {
        self.al
            .iter()
            .map(|col| col.iter().map(|&(i, a)| a * y[i]).sum())
            .collect()
    }

    fn af_mul(&self, xf: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (col, &x) in self.af.iter().zip(xf) {
            for &(i, a) in col {
                out[i] += a * x;
            }
        }
        out
    }

    fn af_t_mul(&self, y: &[f64]) -> Vec<f64> {
        self.af
            .iter()
            .map(|col| col.iter().map(|&(i, a)| a * y[i]).sum())
            .collect()
    }

    /// Lower triangle of `S[i][j] = <A_i, X A_j G>`.
    fn schur(&self, x: &Mat<f64>, g: &Mat<f64>, out: &mut Mat<f64>) {
        let s = self.s;
        let m = self.rows();
        let xf: Vec<f64> = (0..s * s).map(|k| x[(k / s, k % s)]).collect();
        let gf: Vec<f64> = (0..s * s).map(|k| g[(k / s, k % s)]).collect();
        for i in 0..m {
            let ri = self.row(i);
            let mut col = out.col_mut(i);
            for j in i..m {
                let mut acc = 0.0;
                for e in ri.clone() {
                    let p = self.ent_p[e] as usize;
                    let q = self.ent_q[e] as usize;
                    let a = self.ent_a[e];
                    let xq = &xf[q * s..q * s + s];
                    let mut inner = 0.0;
                    for f in self.row(j) {
                        let r = self.ent_p[f] as usize;
                        let t = self.ent_q[f] as usize;
                        inner += self.ent_a[f] * xq[r] * gf[t * s + p];
                    }
                    acc += a * inner;
                }
                col[j] = acc;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    /// Certificate that (P) has no feasible point.
    PrimalInfeasible,
    /// Certificate that (D) has no feasible point.
    DualInfeasible,
    IterationLimit,
    Stalled,
}

/// Per-solve counters surfaced in reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IpmStats {
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

pub(crate) struct IpmResult {
    pub status: IpmStatus,
    pub x: Mat<f64>,
    pub y: Vec<f64>,
    pub xf: Vec<f64>,
    pub stats: IpmStats,
}

pub(crate) struct Settings {
    pub gap: f64,
    pub feasibility: f64,
    pub max_iterations: usize,
}

fn fro(m: &Mat<f64>) -> f64 {
    m.norm_l2()
}

fn inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sym(m: &Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn cholesky(m: &Mat<f64>) -> Option<Mat<f64>> {
    let mut l = m.clone();
    chol_in_place(&mut l).ok()?;
    lower_tri_zero(&mut l);
    Some(l)
}

fn chol_in_place(m: &mut Mat<f64>) -> Result<(), ()> {
    let n = m.nrows();
    let par = Par::Seq;
    let mut buf = MemBuffer::new(llt::factor::cholesky_in_place_scratch::<f64>(
        n,
        par,
        Default::default(),
    ));
    llt::factor::cholesky_in_place(
        m.as_mut(),
        Default::default(),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map(|_| ())
    .map_err(|_| ())
}

fn chol_solve(l: &Mat<f64>, rhs: &mut Mat<f64>) {
    let par = Par::Seq;
    let mut buf = MemBuffer::new(llt::solve::solve_in_place_scratch::<f64>(
        l.nrows(),
        rhs.ncols(),
        par,
    ));
    llt::solve::solve_in_place(l.as_ref(), rhs.as_mut(), par, MemStack::new(&mut buf));
}

/// Largest step `a` with `X + a dX` PSD, given `X = L L'`.
fn max_step(l: &Mat<f64>, dx: &Mat<f64>) -> f64 {
    let mut m = dx.clone();
    triangular_solve::solve_lower_triangular_in_place(l.as_ref(), m.as_mut(), Par::Seq);
    let mut mt = m.transpose().to_owned();
    triangular_solve::solve_lower_triangular_in_place(l.as_ref(), mt.as_mut(), Par::Seq);
    let mt = sym(&mt);
    match mt.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) if !ev.is_empty() && ev[0] < 0.0 => -1.0 / ev[0],
        Ok(_) => f64::INFINITY,
        Err(_) => 0.0,
    }
}

fn max_step_lin(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn lower_tri_zero(m: &mut Mat<f64>) {
    for j in 0..m.ncols() {
        for i in 0..j {
            m[(i, j)] = 0.0;
        }
    }
}

struct Newton<'a> {
    f: &'a StdForm,
    /// Cholesky factor of the Schur complement (lower).
    l: Mat<f64>,
    /// `S^{-1} Af` and the LU of `Af' S^{-1} Af`.
    sinv_af: Option<(Mat<f64>, faer::linalg::solvers::PartialPivLu<f64>)>,
}

impl Newton<'_> {
    fn solve(&self, r: &[f64], rf: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = r.len();
        let mut t = Mat::from_fn(m, 1, |i, _| r[i]);
        chol_solve(&self.l, &mut t);
        let mut dy: Vec<f64> = (0..m).map(|i| t[(i, 0)]).collect();
        let mut dxf = Vec::new();
        if let Some((sa, lu)) = &self.sinv_af {
            use faer::linalg::solvers::Solve;
            let nf = sa.ncols();
            let aft = self.f.af_t_mul(&dy);
            let rhs = Mat::from_fn(nf, 1, |k, _| aft[k] - rf[k]);
            let sol = lu.solve(&rhs);
            dxf = (0..nf).map(|k| sol[(k, 0)]).collect();
            for (i, d) in dy.iter_mut().enumerate() {
                for (k, &x) in dxf.iter().enumerate() {
                    *d -= sa[(i, k)] * x;
                }
            }
        }
        (dy, dxf)
    }
}

const REDUCED_ACCURACY: f64 = 1e-6;

struct Best {
    merit: f64,
    x: Mat<f64>,
    y: Vec<f64>,
    xf: Vec<f64>,
    stats: IpmStats,
}

pub(crate) fn solve(f: &StdForm, set: &Settings) -> IpmResult {
    let s = f.s;
    let m = f.rows();
    let nl = f.cl.len();
    let nf = f.cf.len();

    let row_norm = |i: usize| -> f64 {
        f.row(i).map(|e| f.ent_a[e] * f.ent_a[e]).sum::<f64>().sqrt()
    };
    let mut zeta: f64 = 10f64.max((s as f64).sqrt());
    let mut eta: f64 = zeta.max(fro(&f.c));
    for i in 0..m {
        let an = row_norm(i);
        zeta = zeta.max(s as f64 * (1.0 + f.b[i].abs()) / (1.0 + an));
        eta = eta.max(an);
    }
    let mut x = Mat::<f64>::identity(s, s) * faer::Scale(zeta);
    let mut z = Mat::<f64>::identity(s, s) * faer::Scale(eta);
    let mut y = vec![0.0; m];
    let mut xl = vec![zeta; nl];
    let mut zl = vec![eta; nl];
    let mut xf = vec![0.0; nf];

    let bnorm = norm(&f.b);
    let cnorm = fro(&f.c) + norm(&f.cl) + norm(&f.cf);
    let nu = (s + nl).max(1) as f64;
    let mut stats = IpmStats::default();
    let mut stall = 0;
    let mut schur = Mat::<f64>::zeros(m, m);
    let mut status = IpmStatus::IterationLimit;
    // Per-iteration trace on stderr, for diagnosing slow solves.
    let trace = std::env::var_os("MGTHETA_TRACE").is_some();
    let mut best: Option<Best> = None;

    for it in 0..=set.max_iterations {
        let ax = f.a_op(&x);
        let alx = f.al_mul(&xl);
        let afx = f.af_mul(&xf);
        let rp: Vec<f64> = (0..m).map(|i| f.b[i] - ax[i] - alx[i] - afx[i]).collect();
        let aty = f.a_adj(&y);
        let rd = Mat::from_fn(s, s, |i, j| f.c[(i, j)] - aty[(i, j)] - z[(i, j)]);
        let alty = f.al_t_mul(&y);
        let rl: Vec<f64> = (0..nl).map(|k| f.cl[k] - alty[k] - zl[k]).collect();
        let afty = f.af_t_mul(&y);
        let rf: Vec<f64> = (0..nf).map(|k| f.cf[k] - afty[k]).collect();

        let pobj = inner(&f.c, &x) + dotv(&f.cl, &xl) + dotv(&f.cf, &xf);
        let dobj = dotv(&f.b, &y);
        let gap = inner(&x, &z) + dotv(&xl, &zl);
        let mu = gap / nu;
        let pinf = norm(&rp) / (1.0 + bnorm);
        let dres = (fro(&rd).powi(2) + norm(&rl).powi(2) + norm(&rf).powi(2)).sqrt();
        let dinf = dres / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        stats = IpmStats {
            iterations: it,
            primal_objective: pobj,
            dual_objective: dobj,
            relative_gap: relgap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
        };
        let merit = relgap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|b: &Best| merit < b.merit) {
            best = Some(Best {
                merit,
                x: x.clone(),
                y: y.clone(),
                xf: xf.clone(),
                stats,
            });
        }
        if relgap <= set.gap && pinf <= set.feasibility && dinf <= set.feasibility {
            status = IpmStatus::Optimal;
            break;
        }
        // Certificates: a y with A*(y) <= 0, Al'y <= 0, Af'y = 0 and b.y > 0 rules
        // out (P); an X with A(X) + Al xl + Af xf = 0 and <C,X> + ... < 0 rules out (D).
        let cert_d = {
            let homog = (fro(&(&f.c - &rd)).powi(2)
                + (0..nl).map(|k| (f.cl[k] - rl[k]).powi(2)).sum::<f64>()
                + (0..nf).map(|k| (f.cf[k] - rf[k]).powi(2)).sum::<f64>())
            .sqrt();
            dobj > 0.0 && homog / dobj < set.feasibility
        };
        if cert_d && dobj > 1e8 * (1.0 + cnorm) {
            status = IpmStatus::PrimalInfeasible;
            break;
        }
        let cert_p = {
            let homog = (0..m).map(|i| (f.b[i] - rp[i]).powi(2)).sum::<f64>().sqrt();
            pobj < 0.0 && homog / -pobj < set.feasibility
        };
        if cert_p && -pobj > 1e8 * (1.0 + bnorm) {
            status = IpmStatus::DualInfeasible;
            break;
        }
        if it == set.max_iterations {
            break;
        }

        let Some(lz) = cholesky(&z) else {
            status = IpmStatus::Stalled;
            break;
        };
        let Some(lx) = cholesky(&x) else {
            status = IpmStatus::Stalled;
            break;
        };
        let mut g = Mat::<f64>::identity(s, s);
        chol_solve(&lz, &mut g);
        let g = sym(&g);
        let dl: Vec<f64> = (0..nl).map(|k| xl[k] / zl[k]).collect();

        f.schur(&x, &g, &mut schur);
        for (k, col) in f.al.iter().enumerate() {
            for &(i, a) in col {
                for &(j, b) in col {
                    if j >= i {
                        schur[(j, i)] += dl[k] * a * b;
                    }
                }
            }
        }
        let diag_max = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max);
        let mut factored = false;
        let backup = if m <= 4000 { Some(schur.clone()) } else { None };
        for attempt in 0..6 {
            if attempt > 0 {
                // Restore the lower triangle and add a growing diagonal shift.
                match &backup {
                    Some(b) => schur.copy_from(b),
                    None => {
                        f.schur(&x, &g, &mut schur);
                        for (k, col) in f.al.iter().enumerate() {
                            for &(i, a) in col {
                                for &(j, b) in col {
                                    if j >= i {
                                        schur[(j, i)] += dl[k] * a * b;
                                    }
                                }
                            }
                        }
                    }
                }
                let shift = diag_max.max(1e-300) * 1e-14 * 100f64.powi(attempt);
                for i in 0..m {
                    schur[(i, i)] += shift;
                }
            }
            if chol_in_place(&mut schur).is_ok() {
                factored = true;
                break;
            }
        }
        if !factored {
            status = IpmStatus::Stalled;
            break;
        }
        lower_tri_zero(&mut schur);
        let l = std::mem::replace(&mut schur, Mat::zeros(0, 0));
        let sinv_af = if nf > 0 {
            let mut sa = Mat::from_fn(m, nf, |_, _| 0.0);
            for (k, col) in f.af.iter().enumerate() {
                for &(i, a) in col {
                    sa[(i, k)] += a;
                }
            }
            chol_solve(&l, &mut sa);
            let mut red = Mat::<f64>::zeros(nf, nf);
            for (k, col) in f.af.iter().enumerate() {
                for kk in 0..nf {
                    red[(k, kk)] = col.iter().map(|&(i, a)| a * sa[(i, kk)]).sum();
                }
            }
            let lu = red.partial_piv_lu();
            Some((sa, lu))
        } else {
            None
        };
        let newton = Newton { f, l, sinv_af };

        let xrdg = &(&x * &rd) * &g;
        let direction = |sigma_mu: f64,
                         corr: Option<(&Mat<f64>, &[f64])>|
         -> (Mat<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Mat<f64>, Vec<f64>) {
            let mut h = Mat::from_fn(s, s, |i, j| sigma_mu * g[(i, j)] - x[(i, j)] - xrdg[(i, j)]);
            let mut hl: Vec<f64> = (0..nl)
                .map(|k| sigma_mu / zl[k] - xl[k] - dl[k] * rl[k])
                .collect();
            if let Some((cm, cl)) = corr {
                h = &h - cm;
                for k in 0..nl {
                    hl[k] -= cl[k];
                }
            }
            let ah = f.a_op(&h);
            let alh = f.al_mul(&hl);
            let r: Vec<f64> = (0..m).map(|i| rp[i] - ah[i] - alh[i]).collect();
            let (dy, dxf) = newton.solve(&r, &rf);
            let atdy = f.a_adj(&dy);
            let dz = &rd - &atdy;
            let dx = sym(&(&h + &(&(&x * &atdy) * &g)));
            let altdy = f.al_t_mul(&dy);
            let dzl: Vec<f64> = (0..nl).map(|k| rl[k] - altdy[k]).collect();
            let dxl: Vec<f64> = (0..nl).map(|k| hl[k] + dl[k] * altdy[k]).collect();
            (dx, dxl, dxf, dy, dz, dzl)
        };
        let steps = |dx: &Mat<f64>, dxl: &[f64], dz: &Mat<f64>, dzl: &[f64], gamma: f64| -> (f64, f64) {
            let ap = max_step(&lx, dx).min(max_step_lin(&xl, dxl));
            let ad = max_step(&lz, dz).min(max_step_lin(&zl, dzl));
            ((gamma * ap).min(1.0), (gamma * ad).min(1.0))
        };

        // Predictor.
        let (dxa, dxla, _, _, dza, dzla) = direction(0.0, None);
        let (ap, ad) = steps(&dxa, &dxla, &dza, &dzla, 1.0);
        let mut gap_aff = 0.0;
        {
            let xa = &x + &dxa * faer::Scale(ap);
            let za = &z + &dza * faer::Scale(ad);
            gap_aff += inner(&xa, &za);
            for k in 0..nl {
                gap_aff += (xl[k] + ap * dxla[k]) * (zl[k] + ad * dzla[k]);
            }
        }
        let pred = ap.min(ad);
        let expon = if pred < 0.577 { 1.0 } else { (3.0 * pred * pred).max(1.0) };
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powf(expon);

        // Corrector.
        let corr_m = &(&dxa * &dza) * &g;
        let corr_l: Vec<f64> = (0..nl).map(|k| dxla[k] * dzla[k] / zl[k]).collect();
        let (dx, dxl, dxf, dy, dz, dzl) = direction(sigma * mu, Some((&corr_m, &corr_l)));
        let gamma = 0.9 + 0.09 * pred;
        let (ap, ad) = steps(&dx, &dxl, &dz, &dzl, gamma);
        if trace {
            eprintln!(
                "it {it:3} p {pobj:+.9e} d {dobj:+.9e} gap {relgap:.1e} pinf {pinf:.1e} dinf {dinf:.1e} mu {mu:.1e} sig {sigma:.2} ap {ap:.3} ad {ad:.3}"
            );
        }

        x = sym(&(&x + &dx * faer::Scale(ap)));
        for k in 0..nl {
            xl[k] += ap * dxl[k];
        }
        for k in 0..nf {
            xf[k] += ap * dxf[k];
        }
        z = sym(&(&z + &dz * faer::Scale(ad)));
        for k in 0..nl {
            zl[k] += ad * dzl[k];
        }
        for i in 0..m {
            y[i] += ad * dy[i];
        }
        schur = newton.l;

        if ap < 1e-9 && ad < 1e-9 {
            stall += 1;
            if stall >= 3 {
                status = IpmStatus::Stalled;
                break;
            }
        } else {
            stall = 0;
        }
    }

    // A stalled or truncated run falls back to its best iterate, accepted
    // when that one is already close.
    if matches!(status, IpmStatus::Stalled | IpmStatus::IterationLimit) {
        if let Some(b) = best.filter(|b| b.merit <= REDUCED_ACCURACY) {
            status = IpmStatus::Optimal;
            x = b.x;
            y = b.y;
            xf = b.xf;
            stats = IpmStats {
                iterations: stats.iterations,
                ..b.stats
            };
        }
    }
    IpmResult {
        status,
        x,
        y,
        xf,
        stats,
    }
}
