//! 8-bit RGB PNG output.

use std::path::Path;

use lfprobe_core::render::Frame;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("image i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("png encoding: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decoding: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("expected an 8-bit RGB png")]
    Unsupported,
}

/// Encodes a frame as an 8-bit RGB PNG, rows from the top.
pub fn encode_png(frame: &Frame) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, frame.width, frame.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&frame.rgb_bytes())?;
    }
    Ok(out)
}

pub fn write_png(frame: &Frame, path: &Path) -> Result<(), ImageError> {
    std::fs::write(path, encode_png(frame)?)?;
    Ok(())
}

/// Decodes an 8-bit RGB PNG into `(width, height, rgb bytes)`.
pub fn decode_png(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), ImageError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or(ImageError::Unsupported)?];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::Unsupported);
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}
