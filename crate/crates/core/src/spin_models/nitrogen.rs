//! Substitutional-nitrogen (P1) spin Hamiltonian.
//!
//! H/h = g mu_B/h B.S + A_par Sz Iz + A_perp (Sx Ix + Sy Iy)
//!       + P_par (Iz^2 - I(I+1)/3)
//! in the Jahn-Teller principal frame of one defect orientation. The nuclear
//! Zeeman term is dropped; it is negligible at the fields handled here.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{G_P1, H_PLANCK, MU_B};
use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::spin_models::nv::FieldVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Isotope {
    N14,
    N15,
}

/// Hyperfine/quadrupole parameters of one nitrogen isotope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NitrogenSpecies {
    pub isotope: Isotope,
    /// Electronic g-factor (isotropic).
    pub g: f64,
    /// On-axis hyperfine component, hertz.
    pub a_par_hz: f64,
    /// Transverse hyperfine component, hertz.
    pub a_perp_hz: f64,
    /// On-axis quadrupole component, hertz (zero for I = 1/2).
    pub p_par_hz: f64,
}

impl NitrogenSpecies {
    /// 14N: S = 1/2, I = 1. A_par = 114 MHz, A_perp = 81.3 MHz, P = -3.97 MHz.
    pub fn n14() -> Self {
        NitrogenSpecies {
            isotope: Isotope::N14,
            g: G_P1,
            a_par_hz: 114e6,
            a_perp_hz: 81.3e6,
            p_par_hz: -3.97e6,
        }
    }

    /// 15N: S = 1/2, I = 1/2. A_par = -159.7 MHz, A_perp = -113.83 MHz, P = 0.
    pub fn n15() -> Self {
        NitrogenSpecies {
            isotope: Isotope::N15,
            g: G_P1,
            a_par_hz: -159.7e6,
            a_perp_hz: -113.83e6,
            p_par_hz: 0.0,
        }
    }

    pub fn for_isotope(isotope: Isotope) -> Self {
        match isotope {
            Isotope::N14 => Self::n14(),
            Isotope::N15 => Self::n15(),
        }
    }

    pub fn nuclear_spin(&self) -> f64 {
        match self.isotope {
            Isotope::N14 => 1.0,
            Isotope::N15 => 0.5,
        }
    }

    /// Hilbert-space dimension: 6 for 14N, 4 for 15N.
    pub fn dim(&self) -> usize {
        2 * (2.0 * self.nuclear_spin() + 1.0).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.isotope == Isotope::N15 && self.p_par_hz != 0.0 {
            return Err(Error::InvalidArgument(
                "15N has I = 1/2 and admits no quadrupole term".into(),
            ));
        }
        for v in [self.g, self.a_par_hz, self.a_perp_hz, self.p_par_hz] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument("species parameter not finite".into()));
            }
        }
        Ok(())
    }
}

/// The four [111]-type Jahn-Teller orientations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JtAxis {
    P111,
    P1M1M1,
    M11M1,
    M1M11,
}

impl JtAxis {
    pub const ALL: [JtAxis; 4] = [JtAxis::P111, JtAxis::P1M1M1, JtAxis::M11M1, JtAxis::M1M11];

    /// Unit vector in the cubic crystal frame.
    pub fn unit(&self) -> [f64; 3] {
        let s = 1.0 / 3.0_f64.sqrt();
        match self {
            JtAxis::P111 => [s, s, s],
            JtAxis::P1M1M1 => [s, -s, -s],
            JtAxis::M11M1 => [-s, s, -s],
            JtAxis::M1M11 => [-s, -s, s],
        }
    }

    pub fn index(&self) -> usize {
        match self {
            JtAxis::P111 => 0,
            JtAxis::P1M1M1 => 1,
            JtAxis::M11M1 => 2,
            JtAxis::M1M11 => 3,
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Express a crystal-frame field in the principal frame of one JT axis
/// (z along the axis; the in-plane direction is irrelevant by axial symmetry
/// but chosen deterministically).
pub fn field_in_jt_frame(b: &FieldVector, axis: JtAxis) -> [f64; 3] {
    let n = axis.unit();
    let reference = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize([
        reference[0] - dot(reference, n) * n[0],
        reference[1] - dot(reference, n) * n[1],
        reference[2] - dot(reference, n) * n[2],
    ]);
    let e2 = cross(n, e1);
    let bv = [b.bx, b.by, b.bz];
    [dot(bv, e1), dot(bv, e2), dot(bv, n)]
}

/// Spin matrices for spin s in the basis m = s, s-1, ..., -s.
pub(crate) fn spin_matrices(s: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = (2.0 * s + 1.0).round() as usize;
    let m_of = |k: usize| s - k as f64;
    let mut sz = DMatrix::<Complex64>::zeros(dim, dim);
    let mut sp = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..dim {
        sz[(k, k)] = Complex64::new(m_of(k), 0.0);
        if k > 0 {
            let m = m_of(k);
            sp[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * Complex64::new(0.5, 0.0);
    let sy = (&sp - &sm) * Complex64::new(0.0, -0.5);
    (sx, sy, sz)
}

pub(crate) fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Build H/h (hertz) for one JT orientation, in the product basis
/// |m_S> (x) |m_I> with m descending in each factor.
pub fn build_p1_hamiltonian(
    b: &FieldVector,
    species: &NitrogenSpecies,
    jt_axis: JtAxis,
) -> Result<DMatrix<Complex64>> {
    b.validate()?;
    species.validate()?;
    let b_jt = field_in_jt_frame(b, jt_axis);

    let (sx, sy, sz) = spin_matrices(0.5);
    let (ix, iy, iz) = spin_matrices(species.nuclear_spin());
    let id_s = DMatrix::<Complex64>::identity(2, 2);
    let id_i = DMatrix::<Complex64>::identity(ix.nrows(), ix.nrows());

    let zeeman_hz_per_t = species.g * MU_B / H_PLANCK;
    let mut h = kron(&sx, &id_i) * Complex64::new(zeeman_hz_per_t * b_jt[0], 0.0)
        + kron(&sy, &id_i) * Complex64::new(zeeman_hz_per_t * b_jt[1], 0.0)
        + kron(&sz, &id_i) * Complex64::new(zeeman_hz_per_t * b_jt[2], 0.0);
    h += kron(&sz, &iz) * Complex64::new(species.a_par_hz, 0.0);
    h += (kron(&sx, &ix) + kron(&sy, &iy)) * Complex64::new(species.a_perp_hz, 0.0);
    if species.p_par_hz != 0.0 {
        let spin = species.nuclear_spin();
        let quad = &iz * &iz - &id_i * Complex64::new(spin * (spin + 1.0) / 3.0, 0.0);
        h += kron(&id_s, &quad) * Complex64::new(species.p_par_hz, 0.0);
    }
    Ok(h)
}

/// One electron-spin transition of a single P1 orientation.
#[derive(Debug, Clone)]
pub struct P1Transition {
    pub frequency_hz: f64,
    /// Transition moment |<a|S.e_perp|b>|^2 normalized to the free-electron 1/4.
    pub relative_intensity: f64,
    /// Dominant nuclear projections (lower manifold -> upper manifold).
    pub mi_from: f64,
    pub mi_to: f64,
    pub allowed: bool,
}

/// Diagonalize one orientation and extract the electron-flip transitions.
///
/// Eigenstates are split into two electron manifolds by <S . b_hat>; pairs
/// across the manifolds are classified allowed when their transition moment
/// under a transverse drive exceeds half the free-electron value, which
/// selects the Delta m_I = 0 lines.
pub fn p1_transitions(
    b: &FieldVector,
    species: &NitrogenSpecies,
    jt_axis: JtAxis,
) -> Result<Vec<P1Transition>> {
    let h = build_p1_hamiltonian(b, species, jt_axis)?;
    let eig = hermitian_eigen(&h)?;
    let b_jt = field_in_jt_frame(b, jt_axis);
    let bmag = (b_jt[0] * b_jt[0] + b_jt[1] * b_jt[1] + b_jt[2] * b_jt[2]).sqrt();
    if bmag <= 0.0 {
        return Err(Error::InvalidArgument(
            "a nonzero bias field is required to define ESR transitions".into(),
        ));
    }
    let bhat = [b_jt[0] / bmag, b_jt[1] / bmag, b_jt[2] / bmag];
    // transverse drive direction, deterministic
    let e_perp = {
        let zproj = [
            -bhat[0] * bhat[2],
            -bhat[1] * bhat[2],
            1.0 - bhat[2] * bhat[2],
        ];
        let n = dot(zproj, zproj).sqrt();
        if n > 1e-9 {
            [zproj[0] / n, zproj[1] / n, zproj[2] / n]
        } else {
            [1.0, 0.0, 0.0]
        }
    };

    let (sx, sy, sz) = spin_matrices(0.5);
    let dim_i = (2.0 * species.nuclear_spin() + 1.0).round() as usize;
    let id_i = DMatrix::<Complex64>::identity(dim_i, dim_i);
    let s_along = |d: [f64; 3]| {
        kron(
            &(&sx * Complex64::new(d[0], 0.0)
                + &sy * Complex64::new(d[1], 0.0)
                + &sz * Complex64::new(d[2], 0.0)),
            &id_i,
        )
    };
    let s_b = s_along(bhat);
    let s_drive = s_along(e_perp);

    let dim = h.nrows();
    // electron manifold: the dim/2 states with the largest <S.b_hat> are "up"
    let mut proj: Vec<(usize, f64)> = (0..dim)
        .map(|k| {
            let v = eig.vectors.column(k);
            let p = (v.adjoint() * &s_b * v)[(0, 0)].re;
            (k, p)
        })
        .collect();
    proj.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut is_up = vec![false; dim];
    for &(k, _) in proj.iter().take(dim / 2) {
        is_up[k] = true;
    }

    // dominant nuclear projection of an eigenstate
    let spin_i = species.nuclear_spin();
    let dominant_mi = |k: usize| -> f64 {
        let v = eig.vectors.column(k);
        let mut w = vec![0.0; dim_i];
        for (row, z) in v.iter().enumerate() {
            w[row % dim_i] += z.norm_sqr();
        }
        let best = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        spin_i - best as f64
    };

    let mut out = Vec::new();
    for a in 0..dim {
        for b_idx in 0..dim {
            if !(is_up[a] && !is_up[b_idx]) {
                continue;
            }
            let va = eig.vectors.column(a);
            let vb = eig.vectors.column(b_idx);
            let amp = (va.adjoint() * &s_drive * vb)[(0, 0)];
            let inten = amp.norm_sqr() / 0.25;
            if inten < 1e-9 {
                continue;
            }
            let f = eig.values[a] - eig.values[b_idx];
            if f <= 0.0 {
                continue;
            }
            out.push(P1Transition {
                frequency_hz: f,
                relative_intensity: inten,
                mi_from: dominant_mi(b_idx),
                mi_to: dominant_mi(a),
                allowed: inten >= 0.5,
            });
        }
    }
    out.sort_by(|x, y| x.frequency_hz.total_cmp(&y.frequency_hz));
    Ok(out)
}
