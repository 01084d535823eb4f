//! Builds each tight-frame family and checks `DDᵀ = I` and the Parseval identity.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg;
use frame_recovery::rng::{gaussian_vec, rng_from_seed};

fn main() -> frame_recovery::Result<()> {
    let families = [
        (FrameKind::Identity, 16, 16),
        (FrameKind::RandomOnb, 16, 16),
        (FrameKind::UnionOfOnb, 16, 32),
        (FrameKind::RandomParseval, 16, 40),
    ];
    let f = gaussian_vec(&mut rng_from_seed(1), 16, 1.0);
    println!("{:<16} {:>4} {:>4} {:>12} {:>12} {:>10}", "kind", "n", "d", "residual", "parseval", "‖DᵀD‖₁,₁");
    for (kind, n, d) in families {
        let frame = TightFrame::build(kind, n, d, 7)?;
        let coeffs = frame.analysis(&f)?;
        let defect = (linalg::norm2(&coeffs) - linalg::norm2(&f)).abs();
        println!(
            "{:<16} {n:>4} {d:>4} {:>12.2e} {defect:>12.2e} {:>10.3}",
            format!("{kind:?}"),
            frame.residual(),
            frame.norm_11()
        );
    }

    // Block-diagonal frames pair a signal frame with a noise frame.
    let d = TightFrame::build(FrameKind::RandomOnb, 8, 8, 1)?;
    let omega = TightFrame::build(FrameKind::Identity, 5, 5, 0)?;
    let w = d.block_diag(&omega)?;
    println!("blockdiag(D, Ω): {} x {}, residual {:.2e}", w.n(), w.d(), w.residual());

    // Non-tight matrices are rejected.
    let skewed = linalg::DenseMatrix::diag(&[1.0, 2.0]);
    println!("diag(1, 2) as a frame: {}", TightFrame::from_matrix(skewed).unwrap_err());
    Ok(())
}
