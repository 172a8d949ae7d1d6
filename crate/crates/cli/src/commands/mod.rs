mod analysis;
mod sequences;

use anyhow::Result;

use crate::Command;

pub(crate) fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Segment(a) => sequences::segment(a),
        Command::Features(a) => sequences::features(a),
        Command::Pipeline(a) => sequences::pipeline(a),
        Command::Sweep(a) => sequences::sweep(a),
        Command::Synth(a) => sequences::synth(a),
        Command::Evaluate(a) => analysis::evaluate(a),
        Command::Stats(a) => analysis::stats(a),
        Command::Predict(a) => analysis::predict(a),
    }
}

/// Pretty JSON with a trailing newline.
fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}
