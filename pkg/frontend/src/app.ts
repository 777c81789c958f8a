import { ApiClient, ServiceError } from './api.js';
import { validateSubmission } from './schema.js';
import { renderCompletion, renderTask, showError } from './view.js';

/**
 * Single-page annotation flow: fetch next task, render the grid, submit,
 * advance. Selections live only in the DOM; the server is the source of
 * truth for everything else.
 */
export async function runAnnotationLoop(
  container: HTMLElement,
  client: ApiClient,
  annotatorId: string,
): Promise<void> {
  for (;;) {
    const task = await client.nextTask(annotatorId);
    if (task === null) {
      renderCompletion(container);
      return;
    }
    const submitted = await new Promise<boolean>((resolve) => {
      const handles = renderTask(container, task);
      handles.submitButton.addEventListener('click', async () => {
        const submission = handles.collect(annotatorId);
        if (submission === null) return;
        const problems = validateSubmission(submission);
        if (problems.length > 0) {
          showError(handles, problems.join('; '));
          return;
        }
        handles.submitButton.disabled = true;
        try {
          await client.submit(submission);
          resolve(true);
        } catch (err) {
          // Selections stay in place; re-enable for retry.
          handles.submitButton.disabled = false;
          const message =
            err instanceof ServiceError
              ? `${err.code}: ${err.message}`
              : 'Network failure; check your connection and retry.';
          showError(handles, message);
        }
      });
    });
    if (!submitted) return;
  }
}

export function start(baseUrl = '', annotatorId?: string): Promise<void> {
  const container = document.getElementById('app');
  if (!container) throw new Error('missing #app container');
  const id =
    annotatorId ??
    new URLSearchParams(window.location.search).get('annotator') ??
    'anonymous';
  return runAnnotationLoop(container, new ApiClient(baseUrl), id);
}
