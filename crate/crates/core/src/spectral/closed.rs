use super::boundary::{f_accelerated, f_static};
use super::{FourierMethod, FourierResult, Transition};
use crate::domain::{planck, AtomSpec, Axis, Scenario};
use crate::error::{Error, Result};

/// The accelerated closed form covers x-polarization only.
pub(crate) fn check_accelerated_polarization(atom: &AtomSpec) -> Result<()> {
    let alpha = atom.alpha();
    if alpha[1] != 0.0 || alpha[2] != 0.0 {
        return Err(Error::UnsupportedPolarization { alpha });
    }
    Ok(())
}

/// Per-axis rates from the analytic transforms.
pub fn fourier_closed_form(
    scenario: &Scenario,
    atom: &AtomSpec,
    transition: Transition,
) -> Result<[FourierResult; 3]> {
    scenario.validate()?;
    let omega0 = atom.omega0();
    let lambda = transition.lambda(omega0);
    let thermal = |n: f64| match transition {
        Transition::Emission => 1.0 + n,
        Transition::Excitation => n,
    };

    let factors: [f64; 3] = match *scenario {
        Scenario::StaticFreeSpace => [thermal(0.0); 3],
        Scenario::StaticMirrorThermal { z0, beta } => {
            let f = f_static(omega0, z0)?;
            let t = thermal(planck(beta, omega0));
            Axis::ALL.map(|axis| (1.0 - f.get(axis)) * t)
        }
        Scenario::AcceleratedMirror { a, z0 } => {
            check_accelerated_polarization(atom)?;
            let f = f_accelerated(omega0, z0, a)?;
            let t = thermal(planck(scenario.effective_beta(), omega0));
            let ratio = a / omega0;
            [(1.0 + ratio * ratio - f.f_x) * t, 0.0, 0.0]
        }
    };

    let alpha = atom.alpha();
    Ok(Axis::ALL.map(|axis| FourierResult {
        axis,
        value: atom.gamma0() * alpha[axis.index()] * factors[axis.index()],
        method: FourierMethod::ClosedForm,
        lambda,
    }))
}
