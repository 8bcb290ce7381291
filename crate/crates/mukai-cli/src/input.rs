//! Argument decoding: inline JSON or files, presets or TOML lattices.

use std::path::Path;

use mukai_core::json::{parse, FromJson};
use mukai_core::SurfaceClass;

/// Failure to read or decode an argument; always exit code 1.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn looks_inline(arg: &str) -> bool {
    let t = arg.trim_start();
    t.starts_with('{') || t.starts_with('[') || t.starts_with('"')
}

/// Text of an argument that is inline JSON, `-` for stdin, or a file path.
pub fn read_arg(arg: &str, what: &str) -> Result<(String, String), InputError> {
    if arg == "-" {
        let text = std::io::read_to_string(std::io::stdin()).map_err(|e| InputError(format!("{what}: stdin: {e}")))?;
        return Ok((text, "<stdin>".into()));
    }
    if looks_inline(arg) {
        return Ok((arg.to_string(), "<inline>".into()));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| InputError(format!("{what}: cannot read `{arg}`: {e}")))?;
    Ok((text, arg.to_string()))
}

pub fn load<T: FromJson>(arg: &str, what: &str) -> Result<T, InputError> {
    let (text, source) = read_arg(arg, what)?;
    parse(&text).map_err(|e| InputError(format!("{what} ({source}) at {e}")))
}

/// Preset name, inline TOML, or a TOML file.
pub fn load_surface(arg: &str) -> Result<SurfaceClass, InputError> {
    if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| InputError(format!("surface: cannot read `{arg}`: {e}")))?;
        return SurfaceClass::from_toml(&text).map_err(|e| InputError(format!("surface ({arg}): {e}")));
    }
    SurfaceClass::resolve(arg).map_err(|e| InputError(format!("surface `{arg}`: {e}")))
}
