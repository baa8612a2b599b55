fn main() {
    std::process::exit(pairing_vqe::harness::cli(std::env::args_os()));
}
