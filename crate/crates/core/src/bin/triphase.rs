fn main() -> std::process::ExitCode {
    triphase::cli::main()
}
