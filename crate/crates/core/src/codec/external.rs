//! Subprocess bridge to an external video codec.
//!
//! A command template is split shell-style into argv (no shell is spawned) and
//! the placeholders `{in} {out} {w} {h} {frames} {intra}` are substituted in
//! every argument. The encode command reads raw YUV 4:0:0 from `{in}` and
//! writes the compressed stream to `{out}`; the decode command does the
//! opposite.

use std::fs;
use std::path::Path;
use std::process::Command;

use crate::codec::yuv::{read_yuv400, write_yuv400};
use crate::codec::FrameMeta;
use crate::conversion::PackedFrame;
use crate::error::{Error, Result};

struct Placeholders<'a> {
    input: &'a Path,
    output: &'a Path,
    meta: FrameMeta,
    intra: u32,
}

fn expand(template: &str, p: &Placeholders<'_>) -> Result<Vec<String>> {
    let words = shlex::split(template)
        .ok_or_else(|| Error::InvalidConfig(format!("cannot parse command template {template:?}")))?;
    if words.is_empty() {
        return Err(Error::InvalidConfig("empty command template".into()));
    }
    Ok(words
        .into_iter()
        .map(|w| {
            w.replace("{in}", &p.input.to_string_lossy())
                .replace("{out}", &p.output.to_string_lossy())
                .replace("{w}", &p.meta.width.to_string())
                .replace("{h}", &p.meta.height.to_string())
                .replace("{frames}", &p.meta.count.to_string())
                .replace("{intra}", &p.intra.to_string())
        })
        .collect())
}

fn run(template: &str, p: &Placeholders<'_>) -> Result<()> {
    let argv = expand(template, p)?;
    let output = Command::new(&argv[0])
        .args(&argv[1..])
        .output()
        .map_err(|e| Error::ExternalCodecFailure(format!("cannot start {:?}: {e}", argv[0])))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        let lines: Vec<&str> = stderr.lines().collect();
        let tail = lines[lines.len().saturating_sub(5)..].join("\n");
        return Err(Error::ExternalCodecFailure(format!("{:?} exited with {}: {tail}", argv[0], output.status)));
    }
    Ok(())
}

fn read_output(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::ExternalCodecFailure(format!("no output at {}: {e}", path.display())))
}

pub fn encode(frames: &[PackedFrame], meta: FrameMeta, intra: u32, template: &str) -> Result<Vec<u8>> {
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let input = dir.path().join("in.yuv");
    let output = dir.path().join("out.bin");
    fs::write(&input, write_yuv400(frames)?).map_err(|e| Error::io(&input, e))?;
    run(template, &Placeholders { input: &input, output: &output, meta, intra })?;
    read_output(&output)
}

pub fn decode(payload: &[u8], meta: FrameMeta, intra: u32, template: &str) -> Result<Vec<PackedFrame>> {
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let input = dir.path().join("in.bin");
    let output = dir.path().join("out.yuv");
    fs::write(&input, payload).map_err(|e| Error::io(&input, e))?;
    run(template, &Placeholders { input: &input, output: &output, meta, intra })?;
    let raw = read_output(&output)?;
    let frames = read_yuv400(&raw, meta.width, meta.height, meta.bitdepth)
        .map_err(|e| Error::ExternalCodecFailure(format!("malformed decoder output: {e}")))?;
    if frames.len() != meta.count {
        return Err(Error::ExternalCodecFailure(format!(
            "decoder produced {} frames, expected {}",
            frames.len(),
            meta.count
        )));
    }
    Ok(frames)
}
