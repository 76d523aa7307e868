//! NV ground-state spin-1 Hamiltonian: construction, exact levels, and the
//! two closed-form approximations used for strain and off-axis fields.
//!
//! Basis ordering is |+1>, |0>, |-1>.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::NvConstants;
use crate::eigen::{hermitian_eigen, EigenDecomposition};
use crate::error::{ensure_finite, Error, Result};

/// Magnetic field components in the NV frame, tesla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl FieldVector {
    pub fn new(bx: f64, by: f64, bz: f64) -> Result<Self> {
        let f = FieldVector { bx, by, bz };
        f.validate()?;
        Ok(f)
    }

    pub fn along_z(bz: f64) -> Result<Self> {
        Self::new(0.0, 0.0, bz)
    }

    pub fn magnitude(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("bx", self.bx)?;
        ensure_finite("by", self.by)?;
        ensure_finite("bz", self.bz)?;
        if self.magnitude() >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "field magnitude {:.3} T exceeds the 1 T model validity guard",
                self.magnitude()
            )));
        }
        Ok(())
    }
}

/// Strain / electric-field equivalents entering the NV Hamiltonian, hertz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainParams {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl StrainParams {
    pub const ZERO: StrainParams = StrainParams { mx: 0.0, my: 0.0, mz: 0.0 };

    pub fn new(mx: f64, my: f64, mz: f64) -> Result<Self> {
        let s = StrainParams { mx, my, mz };
        s.validate_against(&NvConstants::default())?;
        Ok(s)
    }

    /// Transverse strain magnitude ||M_perp|| = sqrt(mx^2 + my^2).
    pub fn m_perp(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my).sqrt()
    }

    pub fn validate_against(&self, constants: &NvConstants) -> Result<()> {
        ensure_finite("mx", self.mx)?;
        ensure_finite("my", self.my)?;
        ensure_finite("mz", self.mz)?;
        for (name, v) in [("mx", self.mx), ("my", self.my), ("mz", self.mz)] {
            if v.abs() >= constants.d_hz {
                return Err(Error::InvalidArgument(format!(
                    "|{name}| = {:.3e} Hz is not small against D (perturbative regime guard)",
                    v.abs()
                )));
            }
        }
        Ok(())
    }
}

/// Eigenenergies and the two transition frequencies out of |0>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvLevels {
    /// Energies in hertz (H/h eigenvalues).
    pub e_minus1: f64,
    pub e_0: f64,
    pub e_plus1: f64,
    /// f_-1 = e_-1 - e_0 and f_+1 = e_+1 - e_0.
    pub f_minus1: f64,
    pub f_plus1: f64,
}

impl NvLevels {
    /// Double-quantum splitting f_+1 - f_-1.
    pub fn dq_difference(&self) -> f64 {
        self.f_plus1 - self.f_minus1
    }
}

/// The 3x3 ground-state Hamiltonian (H/h, in hertz) with
/// M_perp = -(Mx + i My) and B_perp = (Bx + i By)/sqrt(2).
pub fn build_nv_hamiltonian(
    constants: &NvConstants,
    b: &FieldVector,
    m: &StrainParams,
) -> Result<DMatrix<Complex64>> {
    b.validate()?;
    m.validate_against(constants)?;
    let g = constants.gamma_hz_per_t;
    let d = constants.d_hz;
    let b_perp = Complex64::new(b.bx, b.by) / 2.0_f64.sqrt();
    let m_perp = -Complex64::new(m.mx, m.my);

    let mut h = DMatrix::<Complex64>::zeros(3, 3);
    h[(0, 0)] = Complex64::new(d + m.mz + g * b.bz, 0.0);
    h[(1, 1)] = Complex64::new(0.0, 0.0);
    h[(2, 2)] = Complex64::new(d + m.mz - g * b.bz, 0.0);
    h[(0, 1)] = g * b_perp.conj();
    h[(1, 0)] = g * b_perp;
    h[(1, 2)] = g * b_perp.conj();
    h[(2, 1)] = g * b_perp;
    h[(0, 2)] = m_perp;
    h[(2, 0)] = m_perp.conj();
    Ok(h)
}

/// Assign eigenvectors to the Zeeman basis labels (|+1>, |0>, |-1>) by the
/// permutation with maximal total overlap. Ties are broken by taking the
/// first permutation in lexicographic order, so at the B_z = 0 degeneracy
/// with nonzero M_perp the lower of the two split levels is labeled |+1>.
fn label_levels(e: &EigenDecomposition) -> NvLevels {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let ov = e.overlaps();
    let mut best = f64::NEG_INFINITY;
    let mut assign = PERMS[0];
    for p in PERMS {
        // p[basis_row] = eigenvector column; basis rows: 0 = |+1>, 1 = |0>, 2 = |-1>
        let total = ov[(0, p[0])] + ov[(1, p[1])] + ov[(2, p[2])];
        if total > best + 1e-12 {
            best = total;
            assign = p;
        }
    }
    let e_plus1 = e.values[assign[0]];
    let e_0 = e.values[assign[1]];
    let e_minus1 = e.values[assign[2]];
    NvLevels {
        e_minus1,
        e_0,
        e_plus1,
        f_minus1: e_minus1 - e_0,
        f_plus1: e_plus1 - e_0,
    }
}

/// Exact eigenlevels of a Hamiltonian built by [`build_nv_hamiltonian`].
pub fn nv_levels_exact(h: &DMatrix<Complex64>) -> Result<NvLevels> {
    let e = hermitian_eigen(h)?;
    Ok(label_levels(&e))
}

/// Closed-form transitions for B_perp = 0:
/// f_{+-1} = D + M_z +- sqrt((gamma B_z)^2 + ||M_perp||^2).
pub fn nv_transitions_strain(
    constants: &NvConstants,
    bz: f64,
    m: &StrainParams,
) -> Result<(f64, f64)> {
    ensure_finite("bz", bz)?;
    m.validate_against(constants)?;
    let g = constants.gamma_hz_per_t;
    let root = ((g * bz) * (g * bz) + m.m_perp() * m.m_perp()).sqrt();
    let base = constants.d_hz + m.mz;
    Ok((base - root, base + root))
}

/// Second-order truncation of [`nv_transitions_strain`]:
/// f_{+-1} ~ D + M_z +- (gamma B_z + ||M_perp||^2 / (2 gamma B_z)).
/// The truncation error is quartic in ||M_perp||.
pub fn nv_transitions_strain_expanded(
    constants: &NvConstants,
    bz: f64,
    m: &StrainParams,
) -> Result<(f64, f64)> {
    ensure_finite("bz", bz)?;
    m.validate_against(constants)?;
    if bz == 0.0 {
        return Err(Error::OutOfRegime(
            "second-order strain expansion needs a nonzero bias field".into(),
        ));
    }
    let g = constants.gamma_hz_per_t;
    let mp = m.m_perp();
    let lin = g * bz + mp * mp / (2.0 * g * bz);
    let base = constants.d_hz + m.mz;
    Ok((base - lin, base + lin))
}

/// Second-order perturbative transitions for a tilted field (M = 0):
/// f_{+-1} ~ D + 3 ||gamma B_perp||^2 / D +- gamma B_z with
/// ||B_perp||^2 = (b_x^2 + b_y^2)/2 = b_perp^2 / 2.
///
/// `b_perp` is the total transverse field magnitude sqrt(bx^2 + by^2). The
/// shift term is common mode: it is the same on both transitions, so the DQ
/// difference is unaffected at this order.
pub fn nv_transitions_offaxis(
    constants: &NvConstants,
    bz: f64,
    b_perp: f64,
) -> Result<(f64, f64)> {
    ensure_finite("bz", bz)?;
    ensure_finite("b_perp", b_perp)?;
    if b_perp < 0.0 {
        return Err(Error::InvalidArgument("b_perp must be nonnegative".into()));
    }
    let g = constants.gamma_hz_per_t;
    if g * b_perp >= 0.1 * constants.d_hz {
        return Err(Error::OutOfRegime(format!(
            "gamma*b_perp = {:.3e} Hz is not small against D = {:.3e} Hz",
            g * b_perp,
            constants.d_hz
        )));
    }
    let shift = 3.0 * (g * g * b_perp * b_perp / 2.0) / constants.d_hz;
    let base = constants.d_hz + shift;
    Ok((base - g * bz, base + g * bz))
}
