//! Lenses between polynomial interfaces, their composite, and how a section
//! of the target pulls back to the source.

use polydyn::poly::{all_sections, compose_map, pull_section, Point, PolyMap, Polynomial, Space};

fn main() -> polydyn::Result<()> {
    let l = Point::label;
    // a thermostat-like interface: two readings, each accepting two commands
    let p = Polynomial::monomial(Space::finite(["cold", "warm"])?, Space::finite(["heat", "idle"])?);
    let q = Polynomial::monomial(Space::finite(["low", "high"])?, Space::finite(["up", "down", "hold"])?);
    let r = Polynomial::linear(Space::finite(["alarm", "ok"])?);

    let phi = PolyMap::lens(p.clone(), q.clone(), move |i| l(if i == &l("cold") { "low" } else { "high" }), move |_, d| {
        l(if d == &l("up") { "heat" } else { "idle" })
    });
    let psi = PolyMap::lens(q.clone(), r.clone(), move |j| l(if j == &l("low") { "alarm" } else { "ok" }), |_, _| {
        Point::label("hold")
    });
    let both = compose_map(&psi, &phi)?;
    println!("{p} -> {q} -> {r}");
    for i in p.positions().enumerate()? {
        println!("  {i} shows as {} and reads back {}", both.forward(&i)?, both.backward_point(&i, &Point::Unit)?);
    }

    for tau in all_sections(&q, 64)? {
        let sigma = pull_section(&phi, &tau)?;
        let table: Vec<String> = sigma.table()?.iter().map(|(i, d)| format!("{i}->{d}")).collect();
        println!("section {} of q pulls back to [{}]", tau.name(), table.join(", "));
    }
    Ok(())
}
