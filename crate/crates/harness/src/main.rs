use clap::Parser;

fn main() -> anyhow::Result<()> {
    wevo_harness::cli::Cli::parse().execute()
}
