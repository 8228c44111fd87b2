fn main() {
    // System OpenBLAS provides BLAS, CBLAS and LAPACK symbols in one shared
    // object on this platform (Debian alternatives point libblas/liblapack at
    // the same build).
    println!("cargo:rustc-link-lib=openblas");
}
