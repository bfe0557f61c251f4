fn main() {
    // Die quietly when a pipe reader closes early, like any other CLI.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(santa_harness::cli::run());
}
