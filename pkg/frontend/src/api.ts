import { AnnotationSubmission, AnnotationTask } from './schema.js';

export interface ApiError {
  code: string;
  message: string;
}

export class ServiceError extends Error {
  readonly code: string;
  constructor(error: ApiError) {
    super(error.message);
    this.code = error.code;
  }
}

/** Thin client over the adjudication service's annotation endpoints. */
export class ApiClient {
  constructor(private readonly baseUrl: string, private readonly doFetch: typeof fetch = fetch) {}

  async nextTask(annotatorId: string): Promise<AnnotationTask | null> {
    const resp = await this.doFetch(
      `${this.baseUrl}/api/tasks/next?annotator=${encodeURIComponent(annotatorId)}`,
    );
    const body = await resp.json();
    if (!resp.ok) throw new ServiceError(body.error);
    return body.task;
  }

  async submit(submission: AnnotationSubmission): Promise<void> {
    const resp = await this.doFetch(`${this.baseUrl}/api/annotations`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(submission),
    });
    if (!resp.ok) {
      const body = await resp.json();
      throw new ServiceError(body.error);
    }
  }
}
