//! Continuous-time systems from vector fields integrated by RK4: exponential
//! decay, and a controlled oscillator driven by a constant input.

use nalgebra::{DMatrix, DVector};
use polydyn::coalg::System;
use polydyn::poly::{Point, Polynomial, Section, Space};

fn main() -> polydyn::Result<()> {
    let decay = System::linear_flow(DMatrix::from_element(1, 1, -1.0), 1e-3)?;
    let cl = decay.closure(&Section::unique(&Polynomial::y())?)?;
    let clock = decay.time();
    let x1 = cl.step(clock.from_real(1.0)?, &Point::vector(vec![1.0]))?;
    let x1 = x1.as_dirac().and_then(Point::as_vector).map(|v| v[0]).unwrap_or(f64::NAN);
    println!("x(1) = {x1:.12}, e^-1 = {:.12}", (-1.0f64).exp());

    // ẍ = −x + u with the force u ∈ ℝ read from the interface's directions
    let p = Polynomial::monomial(Space::euclid(2), Space::euclid(1));
    let osc = System::from_vector_field(p.clone(), 2, 1e-2, |s| Ok(s.clone()), |x, u| {
        let force = u.as_vector().map_or(0.0, |v| v[0]);
        Ok(DVector::from_vec(vec![x[1], -x[0] + force]))
    })?;
    let push = Section::constant(&p, Point::vector(vec![0.5]))?;
    let cl = osc.closure(&push)?;
    let clock = osc.time();
    for t in [0.0, 1.0, 2.0, 3.0] {
        let s = cl.step(clock.from_real(t)?, &Point::vector(vec![0.0, 0.0]))?;
        // exact: x(t) = 0.5 (1 − cos t)
        println!("t = {t}: state {}  exact x = {:.6}", s.as_dirac().unwrap(), 0.5 * (1.0 - t.cos()));
    }
    Ok(())
}
