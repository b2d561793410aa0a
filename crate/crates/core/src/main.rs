fn main() -> std::process::ExitCode {
    flag_syzygy::cli::main()
}
