use shellwave_core::kato::RadialPotential;
use shellwave_core::parametrix::born_series_potential;
use std::f64::consts::PI;

fn main() {
    let amp = 0.05;
    let v = RadialPotential::ball(amp, 1.0);
    let pts = [(2.0f64, 0.75f64), (2.0, 0.3), (1.0, 0.6), (3.0, 1.4)];
    for &dt in &[0.01f64, 0.005] {
        let nt = (5.0 / dt).round() as usize;
        let nr = (5.5 / dt).round() as usize;
        let series = born_series_potential(-1.0, &v, dt, nt, nr, 8, 1e-9).unwrap();
        print!("dt={dt}: ");
        for &(t, rho) in &pts {
            let i = (t / dt).round() as usize;
            let k = (rho / dt).round() as usize;
            print!(" K({t},{rho})={:.7e}", series.sum.ac_value(i, k));
        }
        println!();
    }
    // PDE refinement
    let eta = 0.015;
    let q = move |r: f64| { let x = r / eta; if x >= 1.0 { 0.0 } else { (1.0 - x * x).powi(3) } };
    let mass = shellwave_core::quad::integrate_gl(|r: f64| q(r) * 4.0 * PI * r.sinh() * r.sinh(), 0.0, eta, 32);
    let psi = move |r: f64| q(r) / mass;
    for &dr in &[2.5e-4f64, 1.25e-4] {
        let sol = shellwave_core::reference::wave_1d(
            &|r| if r < 1.0 { amp } else { 0.0 },
            &|r| r.sinh() * psi(r), 9.0, dr, 0.995, 1.0, 5).unwrap();
        print!("dr={dr}: ");
        for &(t, rho) in &pts {
            let (_, row) = sol.samples.iter().find(|(ts, _)| (ts - t).abs() < 1e-9).unwrap();
            let kp = (rho / dr).round() as usize;
            print!(" P({t},{rho})={:.7e}", row[kp] / rho.sinh());
        }
        println!();
    }
}
