fn main() {
    std::process::exit(pearson_spectra::cli::main())
}
