//! Writing and reading the binary tensor container.
//!
//! `cargo run --example tensor_container`

use gsdkit::container::{decode, encode, read_tensor, write_tensor};
use gsdkit::Tensor;

fn main() -> gsdkit::Result<()> {
    let t = Tensor::from_f32(vec![2, 3], vec![0.0, 1.5, -2.0, 3.25, 4.0, 5.5])?;
    let bytes = encode(&t)?;
    println!("{} bytes, header {:02x?}", bytes.len(), &bytes[..8]);
    assert_eq!(decode(&bytes)?, t);

    let path = std::env::temp_dir().join("gsdkit_example.gsdt");
    write_tensor(&path, &t)?;
    let back = read_tensor(&path)?;
    println!("read back {:?} {:?}: {:?}", back.dtype(), back.shape(), back.to_f64_vec());
    std::fs::remove_file(&path).ok();
    Ok(())
}
