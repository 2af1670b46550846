export type Label = 0 | 1;

/** One entry of the card list, as served by GET /api/segments. */
export interface SegmentCard {
  segment_file: string;
  duration_ms: number;
  /** Downsampled [min, max] amplitude pairs; the server caps these at 2000. */
  peaks: [number, number][];
  /** null until this rater has labeled the segment. */
  label: Label | null;
}

/** GET /api/session */
export interface SessionInfo {
  /** Non-null when the server was started pinned to a single rater. */
  rater_id: string | null;
  total: number;
  manifest: string;
}
