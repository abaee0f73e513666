use bergman_ball::measure::{integrate_ball, radial_shell_mass, MeasureSpec, QuadratureGrid};
use num_complex::Complex64;
use std::time::Instant;

fn main() {
    let one = |_: &[f64]| Complex64::new(1.0, 0.0);
    for (n, lambda, max_gen, nodes) in [(3usize, -0.5f64, 12u32, 7usize), (3, 2.5, 12, 7), (2, -0.5, 12, 8)] {
        let spec = MeasureSpec::new(n, lambda).unwrap();
        let grid = QuadratureGrid::uniform(nodes, 1);
        let t = Instant::now();
        let (v, err) = integrate_ball(&one, &spec, max_gen, &grid, &[]).unwrap();
        let dt = t.elapsed().as_secs_f64();
        let resid = radial_shell_mass(&spec, 1.0 - 0.5f64.powi(max_gen as i32 + 1), 1.0);
        println!(
            "n={n} λ={lambda} gen={max_gen} nodes={nodes}: v={:.15} resid={resid:.3e} total-1={:+.3e} errest={err:.1e}  [{dt:.2}s]",
            v.re, v.re + resid - 1.0
        );
    }
}
