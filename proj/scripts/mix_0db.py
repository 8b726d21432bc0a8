#!/usr/bin/env python3
"""Build a 0 dB mixture (equal-energy voice and accompaniment) from two WAVs.

With --stereo-split, a single two-channel file is read as accompaniment on
the left channel and voice on the right, and both stems are written too.
Only 16-bit PCM input is supported. Output is 16-bit PCM mono.
"""

import argparse
import array
import math
import sys
import wave


def read_pcm16(path):
    with wave.open(path, "rb") as w:
        if w.getsampwidth() != 2:
            sys.exit(f"{path}: only 16-bit PCM is supported")
        data = array.array("h", w.readframes(w.getnframes()))
        if sys.byteorder == "big":
            data.byteswap()
        return w.getnchannels(), w.getframerate(), [x / 32768.0 for x in data]


def write_pcm16(path, rate, samples):
    out = array.array("h", (max(-32768, min(32767, round(x * 32767.0))) for x in samples))
    if sys.byteorder == "big":
        out.byteswap()
    with wave.open(path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(out.tobytes())


def mono(channels, samples):
    if channels == 1:
        return samples
    return [sum(samples[i:i + channels]) / channels for i in range(0, len(samples), channels)]


def rms(x):
    return math.sqrt(sum(v * v for v in x) / max(len(x), 1))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--voice")
    p.add_argument("--music")
    p.add_argument("--stereo-split", help="two-channel WAV: left accompaniment, right voice")
    p.add_argument("--out-mix", required=True)
    p.add_argument("--out-voice")
    p.add_argument("--out-music")
    a = p.parse_args()

    if a.stereo_split:
        ch, rate, s = read_pcm16(a.stereo_split)
        if ch != 2:
            sys.exit(f"{a.stereo_split}: expected 2 channels, got {ch}")
        music, voice = s[0::2], s[1::2]
    else:
        if not (a.voice and a.music):
            sys.exit("need --voice and --music, or --stereo-split")
        vc, rate, vs = read_pcm16(a.voice)
        mc, mrate, ms = read_pcm16(a.music)
        if mrate != rate:
            sys.exit("voice and music sample rates differ")
        voice, music = mono(vc, vs), mono(mc, ms)
        n = min(len(voice), len(music))
        voice, music = voice[:n], music[:n]

    rv, rm = rms(voice), rms(music)
    if rv == 0 or rm == 0:
        sys.exit("silent stem; cannot mix at 0 dB")
    voice = [v * rm / rv for v in voice]
    mix = [v + m for v, m in zip(voice, music)]
    peak = max(max(abs(x) for x in mix), 1e-12)
    g = min(1.0, 0.99 / peak)
    write_pcm16(a.out_mix, rate, [x * g for x in mix])
    if a.out_voice:
        write_pcm16(a.out_voice, rate, [x * g for x in voice])
    if a.out_music:
        write_pcm16(a.out_music, rate, [x * g for x in music])


if __name__ == "__main__":
    main()
