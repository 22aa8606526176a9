// The solver's dense kernels call BLAS/LAPACK symbols; take them from the
// system OpenBLAS instead of building one from source.
fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
}
