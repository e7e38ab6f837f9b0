//! Reading and writing 8-bit PNG, PGM, and PPM files.
//!
//! Loading sniffs the file's magic bytes, so a mislabeled extension still
//! decodes. Saving dispatches on the extension. Pixels load as raw byte
//! values (0 to 255) without rescaling; writing quantizes: samples are
//! clamped into the working range, mapped affinely onto 0..=255 when that
//! range is not already [0, 255], and rounded half away from zero.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{GrayImage, IntensityRange, RgbImage};

/// A decoded file: either a single luminance plane or three color planes.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl LoadedImage {
    pub fn width(&self) -> usize {
        match self {
            LoadedImage::Gray(g) => g.width(),
            LoadedImage::Rgb(c) => c.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            LoadedImage::Gray(g) => g.height(),
            LoadedImage::Rgb(c) => c.height(),
        }
    }

    pub fn is_color(&self) -> bool {
        matches!(self, LoadedImage::Rgb(_))
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn decode_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn unsupported(path: &Path, detail: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

/// Decodes a PNG, PGM, or PPM file, recognized by magic bytes.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    match bytes.first() {
        Some(b'P') => load_pnm(&bytes, path),
        Some(0x89) => load_png(&bytes, path),
        _ => Err(unsupported(
            path,
            "not a PNG or binary PGM/PPM file".to_string(),
        )),
    }
}

fn load_png(bytes: &[u8], path: &Path) -> Result<LoadedImage> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| decode_err(path, e.to_string()))?;
    match decoded {
        image::DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let data = img.into_raw().iter().map(|&v| v as f64).collect();
            Ok(LoadedImage::Gray(GrayImage::from_vec(w, h, data)?))
        }
        image::DynamicImage::ImageRgb8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let raw = img.into_raw();
            let mut r = Vec::with_capacity(w * h);
            let mut g = Vec::with_capacity(w * h);
            let mut b = Vec::with_capacity(w * h);
            for px in raw.chunks_exact(3) {
                r.push(px[0] as f64);
                g.push(px[1] as f64);
                b.push(px[2] as f64);
            }
            Ok(LoadedImage::Rgb(RgbImage::from_planes(w, h, r, g, b)?))
        }
        other => Err(unsupported(
            path,
            format!(
                "PNG pixel layout {:?} (only 8-bit grayscale or RGB without alpha)",
                other.color()
            ),
        )),
    }
}

/// Reads one ASCII unsigned integer, skipping whitespace and `#` comments.
fn pnm_int(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<usize> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err(decode_err(path, "expected an integer in the header"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| decode_err(path, "header integer out of range"))
}

fn load_pnm(bytes: &[u8], path: &Path) -> Result<LoadedImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(unsupported(
                path,
                "only binary PGM (P5) and PPM (P6) are handled".to_string(),
            ))
        }
    };
    let mut pos = 2;
    let width = pnm_int(bytes, &mut pos, path)?;
    let height = pnm_int(bytes, &mut pos, path)?;
    let maxval = pnm_int(bytes, &mut pos, path)?;
    if width == 0 || height == 0 {
        return Err(decode_err(path, "zero image dimensions"));
    }
    if maxval != 255 {
        return Err(unsupported(path, format!("maxval {maxval} (only 255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(decode_err(path, "missing separator before pixel data"));
    }
    pos += 1;
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| decode_err(path, "dimensions overflow"))?;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| decode_err(path, format!("truncated raster: wanted {need} bytes")))?;
    if channels == 1 {
        let samples = data.iter().map(|&v| v as f64).collect();
        Ok(LoadedImage::Gray(GrayImage::from_vec(
            width, height, samples,
        )?))
    } else {
        let n = width * height;
        let mut r = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for px in data.chunks_exact(3) {
            r.push(px[0] as f64);
            g.push(px[1] as f64);
            b.push(px[2] as f64);
        }
        Ok(LoadedImage::Rgb(RgbImage::from_planes(
            width, height, r, g, b,
        )?))
    }
}

/// Quantizes one sample of `range` to a byte.
fn to_byte(v: f64, range: &IntensityRange) -> u8 {
    let v = range.clamp(v);
    let scaled = if range.min() == 0.0 && range.max() == 255.0 {
        v
    } else {
        (v - range.min()) * 255.0 / range.span()
    };
    scaled.round() as u8
}

fn gray_bytes(img: &GrayImage, range: &IntensityRange) -> Vec<u8> {
    img.as_slice().iter().map(|&v| to_byte(v, range)).collect()
}

fn rgb_bytes(img: &RgbImage, range: &IntensityRange) -> Vec<u8> {
    let (r, g, b) = img.planes();
    let mut out = Vec::with_capacity(r.len() * 3);
    for i in 0..r.len() {
        out.push(to_byte(r[i], range));
        out.push(to_byte(g[i], range));
        out.push(to_byte(b[i], range));
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum SaveFormat {
    Png,
    Pgm,
    Ppm,
}

fn save_format(path: &Path) -> Result<SaveFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(SaveFormat::Png),
        "pgm" => Ok(SaveFormat::Pgm),
        "ppm" => Ok(SaveFormat::Ppm),
        _ => Err(unsupported(
            path,
            format!("cannot infer output format from extension {ext:?}"),
        )),
    }
}

fn encode_png(
    raster: &[u8],
    width: usize,
    height: usize,
    color: image::ExtendedColorType,
    path: &Path,
) -> Result<Vec<u8>> {
    use image::ImageEncoder;
    let (w, h) = (
        u32::try_from(width).ok(),
        u32::try_from(height).ok(),
    );
    let (w, h) = match (w, h) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err(Error::InvalidParam("image too large for PNG".into())),
    };
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(raster, w, h, color)
        .map_err(|e| decode_err(path, format!("PNG encode failed: {e}")))?;
    Ok(out)
}

/// Writes a luminance image. A `.ppm` target gets the plane replicated into
/// all three channels; `.png` and `.pgm` stay single channel.
pub fn save_gray(img: &GrayImage, range: &IntensityRange, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = gray_bytes(img, range);
    let (w, h) = (img.width(), img.height());
    let payload = match save_format(path)? {
        SaveFormat::Png => encode_png(&bytes, w, h, image::ExtendedColorType::L8, path)?,
        SaveFormat::Pgm => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&bytes);
            out
        }
        SaveFormat::Ppm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            for b in &bytes {
                out.extend_from_slice(&[*b, *b, *b]);
            }
            out
        }
    };
    fs::write(path, payload).map_err(|e| io_err(path, e))
}

/// Writes a color image to `.png` or `.ppm`; a `.pgm` target is refused
/// rather than silently collapsing color to one channel.
pub fn save_rgb(img: &RgbImage, range: &IntensityRange, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = rgb_bytes(img, range);
    let (w, h) = (img.width(), img.height());
    let payload = match save_format(path)? {
        SaveFormat::Png => encode_png(&bytes, w, h, image::ExtendedColorType::Rgb8, path)?,
        SaveFormat::Ppm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&bytes);
            out
        }
        SaveFormat::Pgm => {
            return Err(unsupported(
                path,
                "color output needs .png or .ppm".to_string(),
            ))
        }
    };
    fs::write(path, payload).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn gray_fixture() -> GrayImage {
        GrayImage::from_fn(7, 5, |x, y| ((x * 37 + y * 101) % 256) as f64).unwrap()
    }

    fn rgb_fixture() -> RgbImage {
        RgbImage::from_planes(
            4,
            3,
            (0..12).map(|i| (i * 21 % 256) as f64).collect(),
            (0..12).map(|i| (i * 67 % 256) as f64).collect(),
            (0..12).map(|i| (i * 149 % 256) as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn pgm_round_trip_preserves_bytes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = gray_fixture();
        save_gray(&img, &IntensityRange::EIGHT_BIT, &path).unwrap();
        match load_image(&path).unwrap() {
            LoadedImage::Gray(back) => assert_eq!(back, img),
            _ => panic!("expected grayscale"),
        }
    }

    #[test]
    fn ppm_round_trip_preserves_bytes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.ppm");
        let img = rgb_fixture();
        save_rgb(&img, &IntensityRange::EIGHT_BIT, &path).unwrap();
        match load_image(&path).unwrap() {
            LoadedImage::Rgb(back) => assert_eq!(back, img),
            _ => panic!("expected color"),
        }
    }

    #[test]
    fn png_round_trips_both_layouts() {
        let dir = tempdir().unwrap();
        let gpath = dir.path().join("g.png");
        let cpath = dir.path().join("c.png");
        save_gray(&gray_fixture(), &IntensityRange::EIGHT_BIT, &gpath).unwrap();
        save_rgb(&rgb_fixture(), &IntensityRange::EIGHT_BIT, &cpath).unwrap();
        assert_eq!(load_image(&gpath).unwrap(), LoadedImage::Gray(gray_fixture()));
        assert_eq!(load_image(&cpath).unwrap(), LoadedImage::Rgb(rgb_fixture()));
    }

    #[test]
    fn pnm_header_comments_are_skipped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut data = b"P5 # magic\n# a comment line\n 2 \n#again\n2\n255\n".to_vec();
        data.extend_from_slice(&[1, 2, 3, 4]);
        fs::write(&path, data).unwrap();
        match load_image(&path).unwrap() {
            LoadedImage::Gray(img) => {
                assert_eq!(img.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
            }
            _ => panic!("expected grayscale"),
        }
    }

    #[test]
    fn truncated_raster_is_a_decode_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let mut data = b"P5\n4 4\n255\n".to_vec();
        data.extend_from_slice(&[0; 7]);
        fs::write(&path, data).unwrap();
        assert!(matches!(load_image(&path), Err(Error::Decode { .. })));
    }

    #[test]
    fn odd_maxval_is_unsupported() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let mut data = b"P5\n1 1\n15\n".to_vec();
        data.push(7);
        fs::write(&path, data).unwrap();
        assert!(matches!(
            load_image(&path),
            Err(Error::UnsupportedFormat { .. })
        ));
    }

    #[test]
    fn unknown_magic_and_extension_are_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.bin");
        fs::write(&path, b"GIF89a").unwrap();
        assert!(matches!(
            load_image(&path),
            Err(Error::UnsupportedFormat { .. })
        ));
        let img = gray_fixture();
        let bad = dir.path().join("out.tiff");
        assert!(matches!(
            save_gray(&img, &IntensityRange::EIGHT_BIT, &bad),
            Err(Error::UnsupportedFormat { .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_image("/no/such/file.png"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn gray_to_ppm_replicates_channels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.ppm");
        save_gray(&gray_fixture(), &IntensityRange::EIGHT_BIT, &path).unwrap();
        match load_image(&path).unwrap() {
            LoadedImage::Rgb(img) => {
                let (r, g, b) = img.planes();
                assert_eq!(r, g);
                assert_eq!(g, b);
                assert_eq!(r, gray_fixture().as_slice());
            }
            _ => panic!("expected three channels on disk"),
        }
    }

    #[test]
    fn rgb_to_pgm_is_refused() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        assert!(matches!(
            save_rgb(&rgb_fixture(), &IntensityRange::EIGHT_BIT, &path),
            Err(Error::UnsupportedFormat { .. })
        ));
    }

    #[test]
    fn saving_maps_a_custom_range_onto_bytes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("r.pgm");
        let range = IntensityRange::new(0.0, 1.0).unwrap();
        let img = GrayImage::from_vec(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        save_gray(&img, &range, &path).unwrap();
        match load_image(&path).unwrap() {
            // 0.5 maps to 127.5 and rounds half away from zero
            LoadedImage::Gray(back) => assert_eq!(back.as_slice(), &[0.0, 128.0, 255.0]),
            _ => panic!("expected grayscale"),
        }
    }

    #[test]
    fn saving_clamps_out_of_range_samples() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.pgm");
        let img = GrayImage::from_vec(2, 1, vec![-40.0, 300.0]).unwrap();
        save_gray(&img, &IntensityRange::EIGHT_BIT, &path).unwrap();
        match load_image(&path).unwrap() {
            LoadedImage::Gray(back) => assert_eq!(back.as_slice(), &[0.0, 255.0]),
            _ => panic!("expected grayscale"),
        }
    }
}
