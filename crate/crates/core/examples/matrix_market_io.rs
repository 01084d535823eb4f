//! Matrix Market round trip for frames, sensing matrices and vectors.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg::mtx;
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("frame-recovery-mtx");
    std::fs::create_dir_all(&dir)?;

    let frame = TightFrame::build(FrameKind::RandomParseval, 6, 10, 1)?;
    let frame_path = dir.join("D.mtx");
    frame.write(&frame_path)?;
    let back = TightFrame::from_file(&frame_path)?;
    println!("frame {}x{} read back, residual {:.2e}", back.n(), back.d(), back.residual());

    let a = draw_sensing(&SensingSpec::new(SensingKind::Bernoulli, 4, 6, 2))?;
    let a_path = dir.join("A.mtx");
    mtx::write_matrix(&a_path, &a, Some("Bernoulli sensing matrix"))?;
    assert_eq!(mtx::read_matrix(&a_path)?.as_slice(), a.as_slice());

    let v = vec![0.1, -2.5e-17, 3.0];
    let v_path = dir.join("v.mtx");
    mtx::write_vector(&v_path, &v, None)?;
    assert_eq!(mtx::read_vector(&v_path)?, v);

    print!("{}", mtx::format_matrix(&a, Some("as written")));
    let bad = mtx::parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1.0\n");
    println!("truncated file: {}", bad.unwrap_err());
    Ok(())
}
