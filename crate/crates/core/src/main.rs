fn main() -> std::process::ExitCode {
    tightcalc::cli::run()
}
