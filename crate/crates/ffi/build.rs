use std::fs;
use std::path::Path;

// Regenerates include/sqrng.h from the extern "C" surface. The header
// is committed so C consumers never need the Rust toolchain; the write
// is skipped when nothing changed to keep rebuilds quiet.
fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(Path::new(&crate_dir).join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    let header = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");

    let mut buf = Vec::new();
    header.write(&mut buf);
    let out = Path::new(&crate_dir).join("include").join("sqrng.h");
    if fs::read(&out).ok().as_deref() != Some(buf.as_slice()) {
        fs::create_dir_all(out.parent().unwrap()).unwrap();
        fs::write(&out, &buf).unwrap();
    }
}
