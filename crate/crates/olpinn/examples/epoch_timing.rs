use ndarray::{Array1, Array2};
use olpinn::nn::batch::{backward_jet, backward_values, forward_jet, forward_values, JetAdjoint, JetSpec};
use olpinn::nn::{Activation, NetworkParams, Rng};
use std::time::Instant;

fn time_it<F: FnMut()>(name: &str, iters: usize, mut f: F) {
    let t0 = Instant::now();
    for _ in 0..iters {
        f();
    }
    println!("{name}: {:.1} ms/iter", t0.elapsed().as_secs_f64() * 1000.0 / iters as f64);
}

fn main() {
    let mut rng = Rng::new(0);
    let pinn = NetworkParams::init(&[2, 128, 128, 128, 1], Activation::Tanh, &mut rng).unwrap();
    let trunk = NetworkParams::init(&[3, 24, 24, 24, 8], Activation::Tanh, &mut rng).unwrap();

    let xc = Array2::from_shape_fn((20301, 2), |(i, j)| ((i * 7 + j) as f64 * 0.001).sin());
    let xr = Array2::from_shape_fn((510, 2), |(i, j)| ((i * 3 + j) as f64 * 0.002).sin());
    let tin = Array2::from_shape_fn((20301, 3), |(i, j)| ((i + j) as f64 * 0.0007).cos());

    let vc = forward_values(&pinn, xc.view()).unwrap();
    let adj = Array2::from_elem((20301, 1), 0.3);
    let mut grads = vec![0.0; pinn.len()];

    time_it("pinn fwd 20301", 10, || {
        let _ = forward_values(&pinn, xc.view()).unwrap();
    });
    time_it("pinn bwd 20301", 10, || {
        grads.fill(0.0);
        backward_values(&pinn, &vc, adj.view(), &mut grads);
    });

    let spec = JetSpec { x_axis: 0, t_axis: Some(1), second: true };
    let jc = forward_jet(&pinn, xr.view(), spec).unwrap();
    let jadj = JetAdjoint {
        du: Array1::from_elem(510, 0.2),
        dux: Array1::from_elem(510, -0.1),
        dut: Some(Array1::from_elem(510, 0.15)),
        duxx: Some(Array1::from_elem(510, 0.05)),
    };
    time_it("pinn jet fwd 510", 10, || {
        let _ = forward_jet(&pinn, xr.view(), spec).unwrap();
    });
    time_it("pinn jet bwd 510", 10, || {
        grads.fill(0.0);
        backward_jet(&pinn, &jc, &jadj, &mut grads);
    });

    let tc = forward_values(&trunk, tin.view()).unwrap();
    let tadj = Array2::from_elem((20301, 8), 0.1);
    let mut tgrads = vec![0.0; trunk.len()];
    time_it("trunk fwd 20301", 10, || {
        let _ = forward_values(&trunk, tin.view()).unwrap();
    });
    time_it("trunk bwd 20301", 10, || {
        tgrads.fill(0.0);
        backward_values(&trunk, &tc, tadj.view(), &mut tgrads);
    });

    // raw gemm reference
    let a = Array2::<f64>::from_elem((20301, 128), 1.0);
    let w = Array2::<f64>::from_elem((128, 128), 0.5);
    time_it("raw gemm 20301x128x128 (w.t())", 10, || {
        let _ = a.dot(&w.t());
    });
    time_it("raw gemm 20301x128x128 (w)", 10, || {
        let _ = a.dot(&w);
    });
}
