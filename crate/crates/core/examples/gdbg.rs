use choquard_lab::grid::make_log_grid;
use choquard_lab::groundstate::{find_groundstate, residual_certificate, self_consistency_rel_err};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    for n in [1024usize, 2048, 4096] {
        let t = Instant::now();
        let g = Arc::new(make_log_grid(1e-6, 40.0, n).unwrap());
        let gs = find_groundstate(1.0, &g, 1e-13).unwrap();
        let sc = self_consistency_rel_err(&gs, 0.5).unwrap();
        let cert = residual_certificate(&gs);
        println!("n={n}: self-consistency={sc:.3e} certificate={cert:.3e} M={:.12} beta*={:.12} ({:?})", gs.m_mass, gs.beta_star, t.elapsed());
        if n == 2048 {
            // локализация: where is the disagreement largest?
            let f = gs.shooting.as_ref().unwrap();
            let mut worst = (0.0f64, 0.0f64);
            for (i, &r) in g.nodes().iter().enumerate() {
                if r > 20.0 { break; }
                let d = (gs.w.values()[i] - (f.s[i] + gs.a)).abs() / (f.s[i] + gs.a).abs().max(1e-300);
                if d > worst.1 { worst = (r, d); }
            }
            println!("  worst at r={:.4}: {:.3e}", worst.0, worst.1);
        }
    }
}
