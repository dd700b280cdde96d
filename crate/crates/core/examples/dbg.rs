use qstab_core::quad;

fn main() {
    // Brute-force double integral for condition 2 on the sine-forced
    // parameters: J(T) = ∫0^T [a*(τ) + ‖B‖·K(τ)] dτ,
    // K(τ) = ∫0^τ exp(−∫ξ^τ E) ‖C‖ dξ, E = 0.5 − sin s, a* = −1 − sin τ.
    let ik = |tau: f64, c: f64| -> f64 {
        quad::integrate(
            &|xi: f64| {
                let int_e = 0.5 * (tau - xi) - c * (xi.cos() - tau.cos());
                (-int_e).exp() * 0.2
            },
            0.0,
            tau,
            1e-10,
        )
        .unwrap()
    };
    for c in [0.0_f64, 0.25, 0.5, 1.0] {
        let j = |t: f64| -> f64 {
            quad::integrate(
                &|tau: f64| (-1.0 - c * tau.sin()) + 2.0 * ik(tau, c),
                0.0,
                t,
                1e-8,
            )
            .unwrap()
        };
        let (j60, j100) = (j(60.0), j(100.0));
        println!(
            "C = {c}: J(60) = {j60:.4}, J(100) = {j100:.4}, drift ≈ {:.4}",
            (j100 - j60) / 40.0
        );
        // mean of K over one late period
        let mk = quad::integrate(&|tau: f64| ik(tau, c), 80.0, 80.0 + std::f64::consts::TAU, 1e-9)
            .unwrap()
            / std::f64::consts::TAU;
        println!("  mean K ≈ {mk:.4}  (0.4 would keep the drift at −0.2)");
    }
}
