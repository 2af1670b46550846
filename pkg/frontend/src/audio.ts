/** One shared element; replaying the same URL restarts from the top. */
export class Player {
  private el: HTMLAudioElement | null = null;
  private url = "";

  play(url: string, onError?: (message: string) => void): void {
    if (!this.el) {
      this.el = new Audio();
      this.el.preload = "auto";
    }
    if (this.url !== url) {
      this.el.src = url;
      this.url = url;
    }
    this.el.currentTime = 0;
    const started = this.el.play();
    if (started) {
      started.catch((err) => onError?.(err instanceof Error ? err.message : String(err)));
    }
  }
}
