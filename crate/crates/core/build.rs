// LAPACK routines come from the system OpenBLAS (libopenblas-dev on Debian/Ubuntu).
fn main() {
    println!("cargo:rustc-link-lib=openblas");
}
