fn main() {
    std::process::exit(tempo_steg::cli::run(std::env::args_os()));
}
