// Frame capture: webcam or uploaded image, downscaled to 640x480
// single-channel luminance, paced to a fixed send rate.

export const CAPTURE_WIDTH = 640;
export const CAPTURE_HEIGHT = 480;
export const DEFAULT_RATE_LIMIT = 30; // frames per second

/** BT.601 luma: the wire format is single-channel. */
export function rgbaToLuminance(rgba: Uint8ClampedArray): Uint8Array {
  const n = rgba.length / 4;
  const out = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const r = rgba[4 * i];
    const g = rgba[4 * i + 1];
    const b = rgba[4 * i + 2];
    out[i] = Math.round(0.299 * r + 0.587 * g + 0.114 * b);
  }
  return out;
}

/**
 * Pacing gate: sendTimes holds past send timestamps (ms); returns whether
 * a new send at nowMs keeps the rate at or under limitPerSec.
 */
export function mayCapture(
  sendTimes: number[],
  nowMs: number,
  limitPerSec: number = DEFAULT_RATE_LIMIT,
): boolean {
  const minInterval = 1000 / limitPerSec;
  const last = sendTimes[sendTimes.length - 1];
  return last === undefined || nowMs - last >= minInterval;
}

export async function openWebcam(video: HTMLVideoElement): Promise<boolean> {
  try {
    const stream = await navigator.mediaDevices.getUserMedia({
      video: { width: CAPTURE_WIDTH, height: CAPTURE_HEIGHT },
    });
    video.srcObject = stream;
    await video.play();
    return true;
  } catch {
    return false; // caller shows a banner and falls back to upload
  }
}

/** Draws the source scaled to 640x480 and returns luminance bytes. */
export function grabFrame(
  source: CanvasImageSource,
  work: HTMLCanvasElement,
): Uint8Array {
  work.width = CAPTURE_WIDTH;
  work.height = CAPTURE_HEIGHT;
  const ctx = work.getContext("2d", { willReadFrequently: true })!;
  ctx.drawImage(source, 0, 0, CAPTURE_WIDTH, CAPTURE_HEIGHT);
  const img = ctx.getImageData(0, 0, CAPTURE_WIDTH, CAPTURE_HEIGHT);
  return rgbaToLuminance(img.data);
}
