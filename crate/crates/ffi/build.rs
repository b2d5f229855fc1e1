use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("read cbindgen.toml");
    match cbindgen::Builder::new().with_crate(&dir).with_config(config).generate() {
        Ok(b) => {
            std::fs::create_dir_all(dir.join("include")).unwrap();
            b.write_to_file(dir.join("include/pachinqo.h"));
        }
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
}
