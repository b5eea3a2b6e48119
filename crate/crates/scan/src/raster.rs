//! Binary Netpbm writers: P6 for colour maps, P5 for scalar layers.

use std::io::{self, Write};

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];

/// Row-major RGB image.
#[derive(Clone, Debug)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn filled(width: usize, height: usize, c: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![c; width * height],
        }
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        if x < self.width && y < self.height {
            self.pixels[y * self.width + x] = c;
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Each pixel becomes a `k x k` block.
    pub fn upscale(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut out = Self::filled(self.width * k, self.height * k, WHITE);
        for y in 0..out.height {
            for x in 0..out.width {
                out.pixels[y * out.width + x] = self.get(x / k, y / k);
            }
        }
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        w.write_all(&bytes)
    }
}

/// Row-major 8-bit grey image.
pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, values: &[u8]) -> io::Result<()> {
    assert_eq!(values.len(), width * height, "raster size mismatch");
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_payload() {
        let mut img = Image::filled(2, 1, [1, 2, 3]);
        img.set(1, 0, [4, 5, 6]);
        let mut buf = Vec::new();
        img.write_ppm(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"P6\n2 1\n255\n");
        assert_eq!(&buf[11..], &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn pgm_header_and_payload() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 3, 1, &[0, 127, 254]).unwrap();
        assert_eq!(buf, b"P5\n3 1\n255\n\x00\x7f\xfe");
    }

    #[test]
    fn upscale_repeats_blocks() {
        let mut img = Image::filled(2, 1, [0, 0, 0]);
        img.set(1, 0, [9, 9, 9]);
        let big = img.upscale(2);
        assert_eq!((big.width, big.height), (4, 2));
        assert_eq!(big.get(3, 1), [9, 9, 9]);
        assert_eq!(big.get(1, 1), [0, 0, 0]);
    }
}
