fn main() {
    std::process::exit(psd_sosc::cli::run(std::env::args_os()));
}
