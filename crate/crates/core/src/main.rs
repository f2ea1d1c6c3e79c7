use std::io::{self, BufRead, IsTerminal, Write};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use conquer::schema::Schema;
use conquer::session::{load_population, load_schema, Ambiguity, Format, Session, SessionError, Stage, HELP};
use conquer::value::Population;

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum AmbiguityArg {
    Fail,
    List,
    PickFirst,
}

/// Query ORM schemas in ConQuer.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Schema file (JSON)
    #[arg(long)]
    schema: Option<String>,
    /// Population file (JSON)
    #[arg(long)]
    pop: Option<String>,
    /// Run one query or command and exit
    #[arg(long)]
    query: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// What to do with a query that has several readings
    #[arg(long, value_enum, default_value = "fail")]
    ambiguity: AmbiguityArg,
    /// How NULL is printed
    #[arg(long, default_value = "NULL")]
    null: String,
}

fn read(f: &str) -> Result<String, SessionError> {
    std::fs::read_to_string(f).map_err(|e| SessionError { stage: Stage::Load, message: format!("{f}: {e}") })
}

fn open(args: &Args) -> Result<Session, SessionError> {
    let schema = match &args.schema {
        Some(f) => load_schema(&read(f)?)?,
        None => Schema::new(),
    };
    let pop = match &args.pop {
        Some(f) => load_population(&read(f)?, &schema)?,
        None => Population::new(),
    };
    let mut s = Session::new(schema, pop);
    s.options.format = match args.format {
        FormatArg::Table => Format::Table,
        FormatArg::Csv => Format::Csv,
    };
    s.options.ambiguity = match args.ambiguity {
        AmbiguityArg::Fail => Ambiguity::Fail,
        AmbiguityArg::List => Ambiguity::List,
        AmbiguityArg::PickFirst => Ambiguity::PickFirst,
    };
    s.options.null = args.null.clone();
    Ok(s)
}

fn exit_code(e: &SessionError) -> u8 {
    if e.stage == Stage::Ambiguity {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut session = match open(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(q) = &args.query {
        return match session.command(q) {
            Ok(out) => {
                print!("{out}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(exit_code(&e))
            }
        };
    }
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    if interactive {
        println!("ConQuer; \\help for commands");
    }
    let mut stdout = io::stdout();
    let mut failed = false;
    loop {
        if interactive {
            print!("conquer> ");
            let _ = stdout.flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with("--") {
            continue;
        }
        if line == "\\quit" || line == "\\q" {
            break;
        }
        if line == "\\help" {
            print!("{HELP}");
            continue;
        }
        match session.command(line) {
            Ok(out) => print!("{out}"),
            Err(e) => {
                failed = true;
                eprintln!("{e}");
            }
        }
    }
    if failed && !interactive {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
