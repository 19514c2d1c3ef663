use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    let header = crate_dir.join("include").join("flyaut.h");
    std::fs::create_dir_all(header.parent().expect("include dir")).expect("mkdir include");

    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        // A syntax error in src/lib.rs should surface as the compiler's
        // message, not as a bindgen backtrace; rustc runs right after us.
        Err(cbindgen::Error::ParseSyntaxError { .. }) => {}
        Err(e) => panic!("header generation failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
