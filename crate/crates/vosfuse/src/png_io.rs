//! Indexed-PNG reader/writer for label maps.
//!
//! Masks are stored as palette PNGs whose palette *index* is the object
//! label; the palette colors exist only so the files are viewable. The
//! reader accepts any indexed bit depth (1/2/4/8) and hands back the raw
//! index array; the writer always emits 8-bit indexed files.

use std::borrow::Cow;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use vosfuse_core::mask::MaskError;
use vosfuse_core::{Label, MaskFrame};

#[derive(Debug, thiserror::Error)]
pub enum PngIoError {
    #[error("missing file: {}", path.display())]
    MissingFile { path: PathBuf },
    #[error("{} is not an indexed-palette PNG (color type {color_type})", path.display())]
    NotIndexedPng { path: PathBuf, color_type: String },
    #[error("corrupt image {}: {reason}", path.display())]
    CorruptImage { path: PathBuf, reason: String },
    #[error("label {label} does not fit an 8-bit palette index")]
    LabelOverflow { label: Label },
    #[error("io failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_error(path: &Path, source: io::Error) -> PngIoError {
    if source.kind() == io::ErrorKind::NotFound {
        PngIoError::MissingFile {
            path: path.to_path_buf(),
        }
    } else {
        PngIoError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> PngIoError {
    PngIoError::CorruptImage {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// The 256-color palette written into every mask file.
///
/// Classic bit-reversal colormap: each index spreads its low bits across
/// the high bits of the r/g/b channels, so consecutive labels get visually
/// distinct colors and index 0 stays black.
pub fn label_palette() -> Vec<u8> {
    let mut palette = vec![0u8; 256 * 3];
    for (index, chunk) in palette.chunks_exact_mut(3).enumerate() {
        let (mut r, mut g, mut b) = (0u8, 0u8, 0u8);
        let mut id = index;
        for shift in 0..8u32 {
            r |= (((id >> 0) & 1) as u8) << (7 - shift);
            g |= (((id >> 1) & 1) as u8) << (7 - shift);
            b |= (((id >> 2) & 1) as u8) << (7 - shift);
            id >>= 3;
        }
        chunk[0] = r;
        chunk[1] = g;
        chunk[2] = b;
    }
    palette
}

/// Unpack one scanline of palette indices at the given bit depth.
///
/// PNG packs sub-byte indices most-significant-bit first, each row padded
/// to a whole byte.
fn unpack_row(row: &[u8], width: u32, bits: u32, out: &mut Vec<Label>) {
    let per_byte = 8 / bits;
    let mask = (1u16 << bits) - 1;
    for x in 0..width {
        let byte = row[(x / per_byte) as usize];
        let slot = x % per_byte;
        let shift = 8 - bits * (slot + 1);
        out.push((u16::from(byte) >> shift) & mask);
    }
}

/// Read an indexed PNG as a label map: palette indices become labels
/// verbatim, and the palette colors are ignored.
pub fn load_mask_frame(path: &Path) -> Result<MaskFrame, PngIoError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| corrupt(path, e.to_string()))?;

    let info = reader.info();
    if info.color_type != png::ColorType::Indexed {
        return Err(PngIoError::NotIndexedPng {
            path: path.to_path_buf(),
            color_type: format!("{:?}", info.color_type),
        });
    }
    let width = info.width;
    let height = info.height;
    let bits = info.bit_depth as u32;

    let buf_len = reader
        .output_buffer_size()
        .ok_or_else(|| corrupt(path, "image dimensions overflow"))?;
    let mut buf = vec![0u8; buf_len];
    let out = reader
        .next_frame(&mut buf)
        .map_err(|e| corrupt(path, e.to_string()))?;

    let line = out.line_size;
    let mut labels = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height as usize {
        let row = &buf[y * line..(y + 1) * line];
        if bits == 8 {
            labels.extend(row[..width as usize].iter().map(|&b| Label::from(b)));
        } else {
            unpack_row(row, width, bits, &mut labels);
        }
    }

    MaskFrame::new(width, height, labels).map_err(|e: MaskError| corrupt(path, e.to_string()))
}

/// Write a label map as an 8-bit indexed PNG, atomically.
///
/// The file appears under its final name only after a complete encode: the
/// bytes go to a sibling temp file first and are renamed into place, so an
/// interrupted run never leaves a truncated mask behind.
pub fn save_mask_frame(frame: &MaskFrame, path: &Path) -> Result<(), PngIoError> {
    frame
        .check_max_label(255)
        .map_err(|e| match e {
            MaskError::LabelOverflow { label, .. } => PngIoError::LabelOverflow { label },
            other => corrupt(path, other.to_string()),
        })?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
    }

    let tmp = temp_sibling(path);
    let result = write_png(frame, &tmp);
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
        return result;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_error(path, e)
    })
}

/// Temp name in the same directory (same filesystem) as the target.
fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("mask"));
    path.with_file_name(format!(".{name}.tmp"))
}

fn write_png(frame: &MaskFrame, path: &Path) -> Result<(), PngIoError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), frame.width(), frame.height());
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(Cow::from(label_palette()));
    let mut writer = encoder
        .write_header()
        .map_err(|e| corrupt(path, e.to_string()))?;
    let data: Vec<u8> = frame.labels().iter().map(|&l| l as u8).collect();
    writer
        .write_image_data(&data)
        .map_err(|e| corrupt(path, e.to_string()))?;
    writer
        .finish()
        .map_err(|e| corrupt(path, e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;
    use vosfuse_core::rng::Xoshiro256StarStar;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("png_io_{tag}_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn random_frame(rng: &mut Xoshiro256StarStar, max_label: u64) -> MaskFrame {
        let width = rng.gen_range(1, 24) as u32;
        let height = rng.gen_range(1, 24) as u32;
        let labels = (0..width as usize * height as usize)
            .map(|_| rng.gen_range(0, max_label) as Label)
            .collect();
        MaskFrame::new(width, height, labels).unwrap()
    }

    #[test]
    fn round_trips_random_frames() {
        let dir = tmp_dir("round_trip");
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x90E1);
        for case in 0..50 {
            let frame = random_frame(&mut rng, 255);
            let path = dir.join(format!("{case:05}.png"));
            save_mask_frame(&frame, &path).unwrap();
            let back = load_mask_frame(&path).unwrap();
            assert_eq!(back, frame, "case {case}");
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn reads_identity_palette_indices() {
        let dir = tmp_dir("identity");
        let frame = MaskFrame::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let path = dir.join("tiny.png");
        save_mask_frame(&frame, &path).unwrap();
        let back = load_mask_frame(&path).unwrap();
        assert_eq!(back.labels(), &[0, 1, 1, 0]);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_truecolor_png() {
        let dir = tmp_dir("truecolor");
        let path = dir.join("rgb.png");
        let file = File::create(&path).unwrap();
        let mut encoder = png::Encoder::new(BufWriter::new(file), 2, 1);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().unwrap();
        writer.write_image_data(&[10, 20, 30, 40, 50, 60]).unwrap();
        writer.finish().unwrap();
        assert!(matches!(
            load_mask_frame(&path),
            Err(PngIoError::NotIndexedPng { .. })
        ));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn missing_file_is_its_own_error() {
        let path = Path::new("/nonexistent/dir/frame.png");
        assert!(matches!(
            load_mask_frame(path),
            Err(PngIoError::MissingFile { .. })
        ));
    }

    #[test]
    fn corrupt_bytes_are_rejected() {
        let dir = tmp_dir("corrupt");
        let path = dir.join("broken.png");
        let mut file = File::create(&path).unwrap();
        file.write_all(b"\x89PNG\r\n\x1a\nnot really a png").unwrap();
        drop(file);
        assert!(matches!(
            load_mask_frame(&path),
            Err(PngIoError::CorruptImage { .. })
        ));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn label_overflow_is_rejected_before_writing() {
        let dir = tmp_dir("overflow");
        let frame = MaskFrame::new(1, 1, vec![300]).unwrap();
        let path = dir.join("big.png");
        assert!(matches!(
            save_mask_frame(&frame, &path),
            Err(PngIoError::LabelOverflow { label: 300 })
        ));
        assert!(!path.exists());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn unpacks_sub_byte_depths() {
        // Write packed 4-bit, 2-bit, and 1-bit indexed files by hand and
        // check the reader expands the indices correctly.
        let dir = tmp_dir("depths");
        let cases: [(png::BitDepth, u32, Vec<u8>, Vec<Label>); 3] = [
            (
                png::BitDepth::Four,
                3,
                // rows: [1,2,3] and [4,5,6] → packed high-nibble first
                vec![0x12, 0x30, 0x45, 0x60],
                vec![1, 2, 3, 4, 5, 6],
            ),
            (
                png::BitDepth::Two,
                5,
                // rows of five 2-bit values: [0,1,2,3,0] and [3,2,1,0,1]
                vec![0b0001_1011, 0b0000_0000, 0b1110_0100, 0b0100_0000],
                vec![0, 1, 2, 3, 0, 3, 2, 1, 0, 1],
            ),
            (
                png::BitDepth::One,
                9,
                // rows of nine bits: [1,0,1,0,1,0,1,0,1] ×2
                vec![0b1010_1010, 0b1000_0000, 0b1010_1010, 0b1000_0000],
                vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0, 1, 0, 1],
            ),
        ];
        for (index, (depth, width, packed, want)) in cases.into_iter().enumerate() {
            let path = dir.join(format!("depth_{index}.png"));
            let file = File::create(&path).unwrap();
            let mut encoder = png::Encoder::new(BufWriter::new(file), width, 2);
            encoder.set_color(png::ColorType::Indexed);
            encoder.set_depth(depth);
            encoder.set_palette(Cow::from(label_palette()));
            let mut writer = encoder.write_header().unwrap();
            writer.write_image_data(&packed).unwrap();
            writer.finish().unwrap();

            let frame = load_mask_frame(&path).unwrap();
            assert_eq!(frame.labels(), want.as_slice(), "depth case {index}");
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn palette_is_distinct_for_small_labels() {
        let palette = label_palette();
        assert_eq!(palette.len(), 768);
        assert_eq!(&palette[..3], &[0, 0, 0]);
        let mut seen = std::collections::BTreeSet::new();
        for chunk in palette.chunks_exact(3).take(64) {
            assert!(seen.insert(chunk.to_vec()), "palette colors must differ");
        }
    }

    #[test]
    fn no_temp_files_left_behind() {
        let dir = tmp_dir("atomic");
        let frame = MaskFrame::new(3, 3, vec![0; 9]).unwrap();
        let path = dir.join("a.png");
        save_mask_frame(&frame, &path).unwrap();
        let leftovers: Vec<_> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n.contains(".tmp"))
            .collect();
        assert!(leftovers.is_empty(), "leftover temps: {leftovers:?}");
        fs::remove_dir_all(&dir).unwrap();
    }
}
