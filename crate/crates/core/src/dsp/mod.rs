//! Framing, DFT, STFT spectrograms and db3 wavelets.

pub mod frame;
pub mod spectrogram;
pub mod wavelet;

pub use frame::{dft, dft_magnitude, frame_signal, hamming_window, FrameSpec};
pub use spectrogram::{stft_spectrogram, to_decibel, Framing, Scale, Spectrogram, DB_FLOOR, POWER_EPS};
pub use wavelet::{db3_decompose, db3_denoise, db3_reconstruct, WaveletDecomposition};
