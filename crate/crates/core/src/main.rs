use std::process::ExitCode;

fn main() -> ExitCode {
    match genreframe::cli::run_from(std::env::args_os()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => match e.downcast_ref::<clap::Error>() {
            Some(c) => {
                let _ = c.print();
                ExitCode::from(c.exit_code() as u8)
            }
            None => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
