/**
 * Waveform rendering split in two: pure geometry (testable) and a thin
 * canvas painter. Peaks arrive pre-downsampled from the server, so the
 * browser never decodes WAV data except for playback.
 */

export interface Bar {
  x: number;
  y: number;
  w: number;
  h: number;
}

/**
 * Geometry for min/max amplitude bars: pair i occupies the horizontal
 * stripe [i*width/n, (i+1)*width/n) and spans vertically from its max down
 * to its min, mapping amplitude [-1, 1] to [height, 0]. The number of
 * pairs, not the audio duration, decides the layout, so the visual width
 * is duration-independent.
 */
export function peakBars(
  peaks: [number, number][],
  width: number,
  height: number,
): Bar[] {
  if (peaks.length === 0 || width <= 0 || height <= 0) return [];
  const n = peaks.length;
  const bars: Bar[] = [];
  for (let i = 0; i < n; i++) {
    const [lo, hi] = peaks[i];
    const x0 = (i * width) / n;
    const x1 = ((i + 1) * width) / n;
    const yTop = ((1 - hi) / 2) * height;
    const yBottom = ((1 - lo) / 2) * height;
    bars.push({
      x: x0,
      y: yTop,
      w: Math.max(x1 - x0, 0.5),
      h: Math.max(yBottom - yTop, 1), // a silent stretch still draws a hairline
    });
  }
  return bars;
}

export interface Tick {
  /** Horizontal position as a fraction of the axis, 0..1. */
  frac: number;
  label: string;
}

const STEPS_S = [0.05, 0.1, 0.2, 0.25, 0.5, 1, 2, 5, 10, 30, 60];

function formatSeconds(t: number): string {
  return `${parseFloat(t.toFixed(2))} s`;
}

/** Time-axis ticks in seconds, from 0 to the clip's end, at most maxTicks. */
export function timeTicks(durationMs: number, maxTicks = 6): Tick[] {
  if (!(durationMs > 0)) return [{ frac: 0, label: "0 s" }];
  const total = durationMs / 1000;
  const step =
    STEPS_S.find((s) => total / s <= maxTicks - 1) ?? STEPS_S[STEPS_S.length - 1];
  const ticks: Tick[] = [];
  const count = Math.floor(total / step + 1e-9);
  for (let k = 0; k <= count; k++) {
    const t = k * step;
    // k*step can land a hair past total (0.1 * 3 > 0.3); never draw beyond
    // the axis
    ticks.push({ frac: Math.min(t / total, 1), label: formatSeconds(t) });
  }
  const last = ticks[ticks.length - 1];
  if (1 - last.frac > 1e-6) {
    ticks.push({ frac: 1, label: formatSeconds(total) });
  }
  return ticks;
}

/** Paint peaks and a midline onto a canvas context. */
export function drawWaveform(
  ctx: CanvasRenderingContext2D,
  peaks: [number, number][],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#d8dee6";
  ctx.fillRect(0, height / 2 - 0.5, width, 1);
  ctx.fillStyle = "#3b82c4";
  for (const bar of peakBars(peaks, width, height)) {
    ctx.fillRect(bar.x, bar.y, bar.w, bar.h);
  }
}
